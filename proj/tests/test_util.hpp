#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "mambatrack/autodiff.hpp"
#include "mambatrack/tensor.hpp"

namespace mambatrack::test_support {

inline Tensor random_tensor(std::vector<std::size_t> dims, std::mt19937_64& rng, double lo = -1.0,
                            double hi = 1.0) {
  Tensor t(std::move(dims));
  std::uniform_real_distribution<double> d(lo, hi);
  for (double& v : t.values()) v = d(rng);
  return t;
}

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

// Builds a scalar loss on a tape from the bound input nodes.
using LossBuilder = std::function<ad::Var(ad::Tape&, const std::vector<ad::Var>&)>;

inline double evaluate_loss(const LossBuilder& build, std::vector<Tensor>& inputs) {
  ad::Tape tape;
  std::vector<ad::Var> vars;
  for (const Tensor& t : inputs) vars.push_back(tape.parameter(t));
  return tape.value(build(tape, vars))[0];
}

// Largest relative error between reverse-mode gradients and central
// differences with step h over every element of every input.
inline double gradient_check(const LossBuilder& build, std::vector<Tensor>& inputs, double h = 1e-5) {
  std::vector<Tensor> analytic;
  {
    ad::Tape tape;
    std::vector<ad::Var> vars;
    for (const Tensor& t : inputs) vars.push_back(tape.parameter(t));
    tape.backward(build(tape, vars));
    for (const Tensor& t : inputs) analytic.push_back(tape.parameter_grad(t));
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double saved = inputs[k][i];
      inputs[k][i] = saved + h;
      const double up = evaluate_loss(build, inputs);
      inputs[k][i] = saved - h;
      const double down = evaluate_loss(build, inputs);
      inputs[k][i] = saved;
      worst = std::max(worst, relative_error(analytic[k][i], (up - down) / (2.0 * h)));
    }
  }
  return worst;
}

// Fixed random projection weights turn a tensor output into a scalar loss
// with a generic (non-symmetric) upstream gradient.
inline ad::Var project(ad::Tape& tape, ad::Var y, std::uint64_t seed = 7) {
  std::mt19937_64 rng(seed);
  // Copied: adding nodes may reallocate the tape's value storage.
  const std::vector<std::size_t> dims = tape.value(y).dims();
  const ad::Var w = tape.constant(random_tensor(dims, rng));
  return ad::sum_squares(tape, ad::add(tape, ad::hadamard(tape, y, w), tape.constant(Tensor(dims, 0.3))));
}

}  // namespace mambatrack::test_support
