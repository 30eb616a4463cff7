#pragma once

#include <cstddef>

#include "mambatrack/tensor.hpp"

// Dense building blocks of the motion predictor. Every differentiable
// primitive comes with a vector-Jacobian product (`*_backward`) taking the
// forward inputs and the gradient of the output.
namespace mambatrack::ops {

constexpr double kLayerNormEps = 1e-5;

double silu(double x);
double softplus(double x);
double sigmoid(double x);

Tensor silu(const Tensor& x);
Tensor silu_backward(const Tensor& x, const Tensor& grad_out);
Tensor softplus(const Tensor& x);
Tensor softplus_backward(const Tensor& x, const Tensor& grad_out);
Tensor sigmoid(const Tensor& x);

// Elementwise -exp(x); parameterizes a strictly negative state matrix.
Tensor neg_exp(const Tensor& x);
Tensor neg_exp_backward(const Tensor& y, const Tensor& grad_out);

Tensor add(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);

// y = x * W^T (+ b). x: T x in, W: out x in, b: out.
Tensor affine(const Tensor& x, const Tensor& weight, const Tensor* bias);
struct AffineGrads {
  Tensor input;
  Tensor weight;
  Tensor bias;  // empty when the forward had no bias
};
AffineGrads affine_backward(const Tensor& x, const Tensor& weight, bool has_bias,
                            const Tensor& grad_out);

// Per-row normalization over the feature axis followed by scale and shift.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = kLayerNormEps);
struct LayerNormGrads {
  Tensor input;
  Tensor gamma;
  Tensor beta;
};
LayerNormGrads layer_norm_backward(const Tensor& x, const Tensor& gamma, const Tensor& grad_out,
                                   double eps = kLayerNormEps);

// Depthwise causal convolution over time. x: T x C, weight: C x K, bias: C.
// y[t,c] = bias[c] + sum_k weight[c,k] * x[t-K+1+k, c], reading zeros before t=0.
Tensor depthwise_causal_conv(const Tensor& x, const Tensor& weight, const Tensor& bias);
struct ConvGrads {
  Tensor input;
  Tensor weight;
  Tensor bias;
};
ConvGrads depthwise_causal_conv_backward(const Tensor& x, const Tensor& weight,
                                         const Tensor& grad_out);

// Reverses the row (time) order of a T x C tensor. Self-adjoint.
Tensor reverse_time(const Tensor& x);

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end);
Tensor slice_cols_backward(const Tensor& grad_out, std::size_t total_cols, std::size_t begin);

// Mean over rows, T x C -> 1 x C.
Tensor mean_rows(const Tensor& x);
Tensor mean_rows_backward(const Tensor& grad_out, std::size_t rows);

}  // namespace mambatrack::ops
