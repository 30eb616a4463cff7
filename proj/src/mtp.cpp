#include "mambatrack/mtp.hpp"

#include "mambatrack/primitives.hpp"

namespace mambatrack {

MtpConfig MtpConfig::with_width(std::size_t d_m, std::size_t L, std::size_t q) {
  MtpConfig c;
  c.q = q;
  c.d_m = d_m;
  c.L = L;
  c.d_mlp = 2 * d_m;
  c.head_hidden = d_m;
  return c;
}

void MtpConfig::validate() const {
  if (q == 0 || d_m == 0 || L == 0 || N == 0 || E == 0 || K == 0 || d_mlp == 0 ||
      head_hidden == 0)
    throw DomainError("MtpConfig: all sizes must be positive");
}

std::size_t MtpModel::parameter_count() const {
  std::size_t n = 0;
  visit([&n](const std::string&, const Tensor& t) { n += t.size(); });
  return n;
}

MtpModel init_mtp_model(const MtpConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  MtpModel m;
  m.config = config;
  m.embed = init_linear(4, config.d_m, true, rng);
  for (std::size_t l = 0; l < config.L; ++l)
    m.blocks.push_back(init_bi_mamba_block(config.mamba_dims(), config.d_mlp, rng));
  m.head_fc1 = init_linear(config.d_m, config.head_hidden, true, rng);
  m.head_fc2 = init_linear(config.head_hidden, 4, true, rng);
  return m;
}

Tensor feature_matrix(const TrajFeature& feature) {
  Tensor x({feature.length(), 4});
  for (std::size_t t = 0; t < feature.length(); ++t) {
    const auto d = feature.deltas[t].as_array();
    for (std::size_t k = 0; k < 4; ++k) x(t, k) = d[k];
  }
  return x;
}

namespace {

void require_window(const MtpModel& model, const TrajFeature& feature) {
  if (feature.length() != model.config.q)
    throw ShapeError("feature has " + std::to_string(feature.length()) +
                     " slots, model expects " + std::to_string(model.config.q));
}

}  // namespace

Tensor tokenize(const MtpModel& model, const TrajFeature& feature) {
  require_window(model, feature);
  return model.embed(feature_matrix(feature));
}

OffsetPrediction forward(const MtpModel& model, const TrajFeature& feature) {
  Tensor x = tokenize(model, feature);
  for (const BiMambaParams& block : model.blocks) x = bi_mamba_block(block, x);
  const Tensor pooled = ops::mean_rows(x);
  const Tensor out = model.head_fc2(ops::silu(model.head_fc1(pooled)));
  return {MotionDelta{out[0], out[1], out[2], out[3]}};
}

ad::Var forward(ad::Tape& tape, const MtpModel& model, const TrajFeature& feature) {
  require_window(model, feature);
  ad::Var x = ad::linear(tape, model.embed, tape.constant(feature_matrix(feature)));
  for (const BiMambaParams& block : model.blocks) x = ad::bi_mamba_block(tape, block, x);
  const ad::Var pooled = ad::mean_rows(tape, x);
  return ad::linear(tape, model.head_fc2, ad::silu(tape, ad::linear(tape, model.head_fc1, pooled)));
}

BBox predict_next_box(const MtpModel& model, const std::vector<BBox>& history,
                      const ImageSize& img) {
  if (history.empty()) throw DomainError("predict_next_box: empty trajectory");
  if (history.size() == 1) return history.back();
  const TrajFeature feature = feature_from_boxes(history, model.config.q, img);
  return delta_apply(history.back(), forward(model, feature).offset, img);
}

namespace {

std::vector<BBox> tail_boxes(const Tracklet& tracklet, std::size_t count) {
  const auto& e = tracklet.entries;
  const std::size_t first = e.size() > count ? e.size() - count : 0;
  std::vector<BBox> boxes;
  boxes.reserve(e.size() - first);
  for (std::size_t i = first; i < e.size(); ++i) boxes.push_back(e[i].box);
  return boxes;
}

}  // namespace

BBox predict_next_box(const MtpModel& model, const Tracklet& tracklet, const ImageSize& img) {
  if (tracklet.entries.empty())
    throw DomainError("predict_next_box: tracklet " + std::to_string(tracklet.id) + " is empty");
  return predict_next_box(model, tail_boxes(tracklet, model.config.q + 1), img);
}

std::vector<BBox> rollout(const MtpModel& model, const Tracklet& tracklet, const ImageSize& img,
                          std::size_t steps) {
  std::vector<BBox> out;
  if (steps == 0) return out;
  if (tracklet.entries.empty()) throw DomainError("rollout: empty tracklet");
  std::vector<BBox> window = tail_boxes(tracklet, model.config.q + 1);
  out.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const BBox next = predict_next_box(model, window, img);
    out.push_back(next);
    window.push_back(next);
    if (window.size() > model.config.q + 1) window.erase(window.begin());
  }
  return out;
}

}  // namespace mambatrack
