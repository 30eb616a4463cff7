#pragma once

#include <vector>

#include "mambatrack/tensor.hpp"

namespace mambatrack {

// Continuous-time single-input single-output system
//   h'(t) = A h(t) + B x(t),  y(t) = C h(t) + D x(t).
struct SsmParams {
  Tensor A;  // N x N
  Tensor B;  // N x 1
  Tensor C;  // 1 x N
  double D = 0.0;
  double delta = 1.0;
};

struct DiscreteSsm {
  Tensor A_bar;  // N x N
  Tensor B_bar;  // N x 1
  Tensor C_bar;  // 1 x N
  double D_bar = 0.0;

  std::size_t state_size() const { return A_bar.rows(); }
};

// A_bar = (I - delta/2 A)^-1 (I + delta/2 A), B_bar = (I - delta/2 A)^-1 delta B.
// Throws SingularMatrixError when (I - delta/2 A) cannot be inverted.
DiscreteSsm discretize(const SsmParams& params);

// Sequential recurrence h_k = A_bar h_{k-1} + B_bar x_k, y_k = C_bar h_k + D_bar x_k.
std::vector<double> ssm_scan(const DiscreteSsm& disc, const std::vector<double>& x,
                             const std::vector<double>& h0);

// Inputs of the input-dependent (selective) scan over d_inner independent
// channels, each with a diagonal N-state system.
struct SelectiveScanInputs {
  const Tensor& A;       // d_inner x N, continuous diagonal entries per channel
  const Tensor& u;       // T x d_inner
  const Tensor& delta;   // T x d_inner, strictly positive
  const Tensor& B;       // T x N
  const Tensor& C;       // T x N
  const Tensor& D_skip;  // d_inner
};

// For every channel c and step t the scalar systems (A[c,n], delta[t,c]) are
// discretized with the same bilinear formula as `discretize`, driven by
// B[t,n] u[t,c], read out through C[t,n], plus D_skip[c] u[t,c].
// Zero initial state. Throws DomainError on a nonpositive delta.
Tensor selective_ssm_scan(const SelectiveScanInputs& in);

struct SelectiveScanGrads {
  Tensor A;
  Tensor u;
  Tensor delta;
  Tensor B;
  Tensor C;
  Tensor D_skip;
};

SelectiveScanGrads selective_ssm_scan_backward(const SelectiveScanInputs& in,
                                               const Tensor& grad_out);

}  // namespace mambatrack
