#include "mambatrack/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

namespace mambatrack {

double smooth_l1_loss(const MotionDelta& pred, const MotionDelta& target) {
  const auto p = pred.as_array();
  const auto t = target.as_array();
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double d = std::abs(p[i] - t[i]);
    sum += d < 1.0 ? 0.5 * d * d : d - 0.5;
  }
  return sum / 4.0;
}

double lr_at(std::size_t step, const TrainConfig& cfg) {
  if (step < 1) throw DomainError("lr_at: step must be >= 1");
  const double w = static_cast<double>(step);
  return std::pow(static_cast<double>(cfg.d_m), -0.5) *
         std::min(std::pow(w, -0.5), w * std::pow(cfg.w_warmup, -1.5));
}

AdamState make_adam_state(std::span<Tensor* const> params) {
  AdamState s;
  for (const Tensor* p : params) {
    s.first_moment.push_back(Tensor::zeros_like(*p));
    s.second_moment.push_back(Tensor::zeros_like(*p));
  }
  return s;
}

void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size())
    throw ShapeError("adam_step: parameter/gradient/state count mismatch");
  ++state.step;
  const double w = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(beta1, w);
  const double c2 = 1.0 - std::pow(beta2, w);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    Tensor& m = state.first_moment[i];
    Tensor& v = state.second_moment[i];
    require_same_shape(p, g, "adam_step");
    require_same_shape(p, m, "adam_step");
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
      v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
      const double m_hat = m[k] / c1;
      const double v_hat = v[k] / c2;
      p[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
    }
  }
}

std::vector<WindowSample> build_windows(const std::vector<Tracklet>& ground_truth, std::size_t q,
                                        const ImageSize& img) {
  std::vector<WindowSample> out;
  for (const Tracklet& track : ground_truth) {
    const auto& e = track.entries;
    std::size_t run_start = 0;
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (i > 0 && e[i].frame != e[i - 1].frame + 1) run_start = i;
      // Sample for frame i needs q+1 history boxes inside the current run.
      if (i - run_start < q + 1) continue;
      std::vector<MotionDelta> deltas;
      deltas.reserve(q);
      for (std::size_t j = i - q; j < i; ++j)
        deltas.push_back(delta_encode(e[j - 1].box, e[j].box, img));
      out.push_back({TrajFeature::from_deltas(deltas, q), delta_encode(e[i - 1].box, e[i].box, img)});
    }
  }
  return out;
}

std::vector<Tensor*> parameter_list(MtpModel& model) {
  std::vector<Tensor*> params;
  model.visit([&params](const std::string&, Tensor& t) { params.push_back(&t); });
  return params;
}

namespace {

Tensor target_tensor(const MotionDelta& d) {
  return Tensor({1, 4}, std::vector<double>{d.dcx, d.dcy, d.dw, d.dh});
}

}  // namespace

std::vector<Tensor> batch_gradient(const MtpModel& model, std::span<const WindowSample> batch,
                                   double* mean_loss_out) {
  std::vector<const Tensor*> params;
  model.visit([&params](const std::string&, const Tensor& t) { params.push_back(&t); });
  std::vector<Tensor> grads;
  grads.reserve(params.size());
  for (const Tensor* p : params) grads.push_back(Tensor::zeros_like(*p));

  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss_sum = 0.0;
  for (const WindowSample& s : batch) {
    ad::Tape tape;
    const ad::Var pred = forward(tape, model, s.feature);
    const ad::Var loss = ad::smooth_l1(tape, pred, target_tensor(s.target));
    loss_sum += tape.value(loss)[0];
    tape.backward(loss, scale);
    for (std::size_t i = 0; i < params.size(); ++i) grads[i] += tape.parameter_grad(*params[i]);
  }
  if (mean_loss_out) *mean_loss_out = loss_sum * scale;
  return grads;
}

TrainResult train(std::span<const WindowSample> dataset, const TrainConfig& cfg, MtpModel& model) {
  if (dataset.empty()) throw DomainError("train: empty dataset");
  if (cfg.batch_size == 0) throw DomainError("train: batch size must be positive");
  for (const WindowSample& s : dataset)
    if (s.feature.length() != model.config.q)
      throw DomainError("train: window length does not match model look-back");

  std::vector<Tensor*> params = parameter_list(model);
  AdamState adam = make_adam_state(params);
  Rng rng(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::vector<WindowSample> batch;

  TrainResult result;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(dataset[order[i]]);
      double loss = 0.0;
      const std::vector<Tensor> grads = batch_gradient(model, batch, &loss);
      const double lr = lr_at(adam.step + 1, cfg);
      adam_step(params, grads, adam, lr, cfg.beta1, cfg.beta2, cfg.eps);
      result.curve.push_back({adam.step, lr, loss});
    }
  }
  return result;
}

double mean_loss(const MtpModel& model, std::span<const WindowSample> samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const WindowSample& s : samples) sum += smooth_l1_loss(forward(model, s.feature).offset, s.target);
  return sum / static_cast<double>(samples.size());
}

double zero_motion_loss(std::span<const WindowSample> samples) {
  if (samples.empty()) return 0.0;
  double sum = 0.0;
  for (const WindowSample& s : samples) sum += smooth_l1_loss(MotionDelta{}, s.target);
  return sum / static_cast<double>(samples.size());
}

void write_loss_csv(const std::vector<StepRecord>& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write loss curve to " + path);
  out << "step,lr,loss\n";
  char line[96];
  for (const StepRecord& r : curve) {
    std::snprintf(line, sizeof line, "%zu,%.10e,%.10e\n", r.step, r.lr, r.loss);
    out << line;
  }
  if (!out) throw Error("failed writing loss curve to " + path);
}

}  // namespace mambatrack
