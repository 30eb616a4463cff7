#pragma once

#include <string>
#include <vector>

#include "mambatrack/mtp.hpp"
#include "mambatrack/train.hpp"
#include "test_util.hpp"

namespace mambatrack::test_support {

struct GradientCase {
  std::string name;
  LossBuilder build;
  std::vector<Tensor> inputs;
};

inline MambaDims tiny_dims() {
  MambaDims d;
  d.d_model = 3;
  d.expand = 2;
  d.d_state = 2;
  d.conv_width = 3;
  return d;
}

// One case per differentiable primitive plus the composed blocks.
inline std::vector<GradientCase> gradient_cases() {
  std::mt19937_64 rng(11);
  auto R = [&rng](std::vector<std::size_t> dims, double lo = -1.0, double hi = 1.0) {
    return random_tensor(std::move(dims), rng, lo, hi);
  };
  using V = const std::vector<ad::Var>&;
  std::vector<GradientCase> cases;

  cases.push_back({"affine", [](ad::Tape& t, V v) { return project(t, ad::affine(t, v[0], v[1], v[2])); },
                   {R({3, 4}), R({5, 4}), R({5})}});
  cases.push_back({"affine_no_bias",
                   [](ad::Tape& t, V v) { return project(t, ad::affine(t, v[0], v[1], std::nullopt)); },
                   {R({2, 3}), R({4, 3})}});
  cases.push_back({"silu", [](ad::Tape& t, V v) { return project(t, ad::silu(t, v[0])); }, {R({3, 4}, -3, 3)}});
  cases.push_back(
      {"softplus", [](ad::Tape& t, V v) { return project(t, ad::softplus(t, v[0])); }, {R({3, 4}, -3, 3)}});
  cases.push_back({"neg_exp", [](ad::Tape& t, V v) { return project(t, ad::neg_exp(t, v[0])); }, {R({2, 3})}});
  cases.push_back({"add", [](ad::Tape& t, V v) { return project(t, ad::add(t, v[0], v[1])); }, {R({2, 3}), R({2, 3})}});
  cases.push_back(
      {"hadamard", [](ad::Tape& t, V v) { return project(t, ad::hadamard(t, v[0], v[1])); }, {R({2, 3}), R({2, 3})}});
  cases.push_back({"layer_norm", [](ad::Tape& t, V v) { return project(t, ad::layer_norm(t, v[0], v[1], v[2])); },
                   {R({3, 5}), R({5}, 0.5, 1.5), R({5})}});
  cases.push_back({"depthwise_causal_conv",
                   [](ad::Tape& t, V v) { return project(t, ad::depthwise_causal_conv(t, v[0], v[1], v[2])); },
                   {R({5, 3}), R({3, 4}), R({3})}});
  cases.push_back({"selective_scan",
                   [](ad::Tape& t, V v) {
                     return project(t, ad::selective_scan(t, v[0], v[1], v[2], v[3], v[4], v[5]));
                   },
                   {R({3, 2}, -2.0, -0.2), R({4, 3}), R({4, 3}, 0.1, 1.5), R({4, 2}), R({4, 2}), R({3})}});
  cases.push_back({"reverse_time", [](ad::Tape& t, V v) { return project(t, ad::reverse_time(t, v[0])); }, {R({4, 2})}});
  cases.push_back(
      {"slice_cols", [](ad::Tape& t, V v) { return project(t, ad::slice_cols(t, v[0], 1, 3)); }, {R({3, 4})}});
  cases.push_back({"mean_rows", [](ad::Tape& t, V v) { return project(t, ad::mean_rows(t, v[0])); }, {R({4, 3})}});
  cases.push_back({"sum_squares", [](ad::Tape& t, V v) { return ad::sum_squares(t, v[0]); }, {R({2, 3})}});
  cases.push_back({"scale", [](ad::Tape& t, V v) { return project(t, ad::scale(t, v[0], -1.7)); }, {R({2, 3})}});
  {
    // Differences on both sides of the kink at |d| = 1, away from it.
    Tensor pred = Tensor::matrix(1, 4, {0.2, -0.4, 1.5, -2.0});
    Tensor target = Tensor::matrix(1, 4, {0.5, 0.1, -0.5, 0.6});
    cases.push_back({"smooth_l1", [target](ad::Tape& t, V v) { return ad::smooth_l1(t, v[0], target); }, {pred}});
  }

  // Whole blocks: gradients w.r.t. the input sequence. Parameter gradients
  // are covered by the full-model check.
  {
    Rng prng(12);
    const auto block = std::make_shared<MambaBlockParams>(init_mamba_block(tiny_dims(), prng));
    cases.push_back({"mamba_block", [block](ad::Tape& t, V v) { return project(t, ad::mamba_block(t, *block, v[0])); },
                     {R({4, 3})}});
    const auto bi = std::make_shared<BiMambaParams>(init_bi_mamba_block(tiny_dims(), 6, prng));
    cases.push_back({"bi_mamba_block",
                     [bi](ad::Tape& t, V v) { return project(t, ad::bi_mamba_block(t, *bi, v[0])); }, {R({4, 3})}});
  }
  return cases;
}

// Central differences over every parameter of `model` against the
// reverse-mode gradient of the smooth-L1 loss on `sample`.
inline double model_gradient_check(MtpModel& model, const WindowSample& sample, double h = 1e-5) {
  const std::vector<WindowSample> batch{sample};
  const std::vector<Tensor> analytic = batch_gradient(model, batch);
  std::vector<Tensor*> params = parameter_list(model);
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = *params[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + h;
      const double up = mean_loss(model, batch);
      p[i] = saved - h;
      const double down = mean_loss(model, batch);
      p[i] = saved;
      worst = std::max(worst, relative_error(analytic[k][i], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

inline WindowSample random_window(std::size_t q, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-0.05, 0.05);
  std::vector<MotionDelta> deltas(q);
  for (MotionDelta& m : deltas) m = {d(rng), d(rng), d(rng), d(rng)};
  return {TrajFeature::from_deltas(deltas, q), {0.3, -0.2, 0.1, 0.05}};
}

}  // namespace mambatrack::test_support
