#include "mambatrack/primitives.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

namespace mambatrack::ops {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMatrix>;
using MutMap = Eigen::Map<RowMatrix>;

ConstMap as_matrix(const Tensor& t) { return ConstMap(t.data(), t.rows(), t.cols()); }
MutMap as_matrix(Tensor& t) { return MutMap(t.data(), t.rows(), t.cols()); }

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) throw ShapeError(std::string(what) + ": expected a matrix, got " + t.shape_string());
}

template <typename F>
Tensor map(const Tensor& x, F f) {
  Tensor y = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return y;
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double silu(double x) { return x * sigmoid(x); }

// Floored at the smallest normal double so very negative inputs keep Δ > 0
// instead of underflowing to zero.
double softplus(double x) {
  return std::max(std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))),
                  std::numeric_limits<double>::min());
}

Tensor silu(const Tensor& x) { return map(x, [](double v) { return silu(v); }); }

Tensor silu_backward(const Tensor& x, const Tensor& grad_out) {
  require_same_shape(x, grad_out, "silu_backward");
  Tensor g = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double s = sigmoid(x[i]);
    g[i] = grad_out[i] * s * (1.0 + x[i] * (1.0 - s));
  }
  return g;
}

Tensor softplus(const Tensor& x) { return map(x, [](double v) { return softplus(v); }); }

Tensor softplus_backward(const Tensor& x, const Tensor& grad_out) {
  require_same_shape(x, grad_out, "softplus_backward");
  Tensor g = Tensor::zeros_like(x);
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = grad_out[i] * sigmoid(x[i]);
  return g;
}

Tensor sigmoid(const Tensor& x) { return map(x, [](double v) { return sigmoid(v); }); }

Tensor neg_exp(const Tensor& x) { return map(x, [](double v) { return -std::exp(v); }); }

Tensor neg_exp_backward(const Tensor& y, const Tensor& grad_out) {
  require_same_shape(y, grad_out, "neg_exp_backward");
  Tensor g = Tensor::zeros_like(y);
  for (std::size_t i = 0; i < y.size(); ++i) g[i] = grad_out[i] * y[i];
  return g;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor y = a;
  y += b;
  return y;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor y = Tensor::zeros_like(a);
  for (std::size_t i = 0; i < a.size(); ++i) y[i] = a[i] * b[i];
  return y;
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor* bias) {
  require_matrix(x, "affine input");
  require_matrix(weight, "affine weight");
  if (x.cols() != weight.cols())
    throw ShapeError("affine: input " + x.shape_string() + " incompatible with weight " +
                     weight.shape_string());
  if (bias && (bias->rank() != 1 || bias->size() != weight.rows()))
    throw ShapeError("affine: bias " + bias->shape_string() + " incompatible with weight " +
                     weight.shape_string());
  Tensor y({x.rows(), weight.rows()});
  as_matrix(y).noalias() = as_matrix(x) * as_matrix(weight).transpose();
  if (bias) {
    for (std::size_t r = 0; r < y.rows(); ++r)
      for (std::size_t c = 0; c < y.cols(); ++c) y(r, c) += (*bias)[c];
  }
  return y;
}

AffineGrads affine_backward(const Tensor& x, const Tensor& weight, bool has_bias,
                            const Tensor& grad_out) {
  if (grad_out.rows() != x.rows() || grad_out.cols() != weight.rows())
    throw ShapeError("affine_backward: gradient shape " + grad_out.shape_string());
  AffineGrads g{Tensor::zeros_like(x), Tensor::zeros_like(weight), {}};
  as_matrix(g.input).noalias() = as_matrix(grad_out) * as_matrix(weight);
  as_matrix(g.weight).noalias() = as_matrix(grad_out).transpose() * as_matrix(x);
  if (has_bias) {
    g.bias = Tensor({weight.rows()});
    for (std::size_t r = 0; r < grad_out.rows(); ++r)
      for (std::size_t c = 0; c < grad_out.cols(); ++c) g.bias[c] += grad_out(r, c);
  }
  return g;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_matrix(x, "layer_norm");
  const std::size_t d = x.cols();
  if (gamma.size() != d || beta.size() != d) throw ShapeError("layer_norm: affine size mismatch");
  Tensor y = Tensor::zeros_like(x);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += x(r, c);
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (x(r, c) - mean) * (x(r, c) - mean);
    var /= static_cast<double>(d);
    const double inv_std = 1.0 / std::sqrt(var + eps);
    for (std::size_t c = 0; c < d; ++c) y(r, c) = (x(r, c) - mean) * inv_std * gamma[c] + beta[c];
  }
  return y;
}

LayerNormGrads layer_norm_backward(const Tensor& x, const Tensor& gamma, const Tensor& grad_out,
                                   double eps) {
  require_same_shape(x, grad_out, "layer_norm_backward");
  const std::size_t d = x.cols();
  const double n = static_cast<double>(d);
  LayerNormGrads g{Tensor::zeros_like(x), Tensor({d}), Tensor({d})};
  std::vector<double> xhat(d), gxhat(d);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double mean = 0.0;
    for (std::size_t c = 0; c < d; ++c) mean += x(r, c);
    mean /= n;
    double var = 0.0;
    for (std::size_t c = 0; c < d; ++c) var += (x(r, c) - mean) * (x(r, c) - mean);
    var /= n;
    const double inv_std = 1.0 / std::sqrt(var + eps);
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      xhat[c] = (x(r, c) - mean) * inv_std;
      gxhat[c] = grad_out(r, c) * gamma[c];
      g.gamma[c] += grad_out(r, c) * xhat[c];
      g.beta[c] += grad_out(r, c);
      sum_g += gxhat[c];
      sum_gx += gxhat[c] * xhat[c];
    }
    for (std::size_t c = 0; c < d; ++c)
      g.input(r, c) = inv_std * (gxhat[c] - sum_g / n - xhat[c] * sum_gx / n);
  }
  return g;
}

Tensor depthwise_causal_conv(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  require_matrix(x, "depthwise_causal_conv");
  const std::size_t steps = x.rows();
  const std::size_t channels = x.cols();
  if (weight.rank() != 2 || weight.rows() != channels || bias.size() != channels)
    throw ShapeError("depthwise_causal_conv: weight " + weight.shape_string() + " for input " +
                     x.shape_string());
  const std::size_t width = weight.cols();
  Tensor y = Tensor::zeros_like(x);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      double acc = bias[c];
      for (std::size_t k = 0; k < width; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) -
                                   static_cast<std::ptrdiff_t>(width - 1);
        if (src >= 0) acc += weight(c, k) * x(static_cast<std::size_t>(src), c);
      }
      y(t, c) = acc;
    }
  }
  return y;
}

ConvGrads depthwise_causal_conv_backward(const Tensor& x, const Tensor& weight,
                                         const Tensor& grad_out) {
  require_same_shape(x, grad_out, "depthwise_causal_conv_backward");
  const std::size_t steps = x.rows();
  const std::size_t channels = x.cols();
  const std::size_t width = weight.cols();
  ConvGrads g{Tensor::zeros_like(x), Tensor::zeros_like(weight), Tensor({channels})};
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double go = grad_out(t, c);
      g.bias[c] += go;
      for (std::size_t k = 0; k < width; ++k) {
        const std::ptrdiff_t src = static_cast<std::ptrdiff_t>(t + k) -
                                   static_cast<std::ptrdiff_t>(width - 1);
        if (src < 0) continue;
        const auto s = static_cast<std::size_t>(src);
        g.weight(c, k) += go * x(s, c);
        g.input(s, c) += go * weight(c, k);
      }
    }
  }
  return g;
}

Tensor reverse_time(const Tensor& x) {
  require_matrix(x, "reverse_time");
  Tensor y = Tensor::zeros_like(x);
  const std::size_t steps = x.rows();
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t c = 0; c < x.cols(); ++c) y(t, c) = x(steps - 1 - t, c);
  return y;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_matrix(x, "slice_cols");
  if (begin > end || end > x.cols()) throw ShapeError("slice_cols: range out of bounds");
  Tensor y({x.rows(), end - begin});
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = begin; c < end; ++c) y(r, c - begin) = x(r, c);
  return y;
}

Tensor slice_cols_backward(const Tensor& grad_out, std::size_t total_cols, std::size_t begin) {
  Tensor g({grad_out.rows(), total_cols});
  for (std::size_t r = 0; r < grad_out.rows(); ++r)
    for (std::size_t c = 0; c < grad_out.cols(); ++c) g(r, begin + c) = grad_out(r, c);
  return g;
}

Tensor mean_rows(const Tensor& x) {
  require_matrix(x, "mean_rows");
  Tensor y({1, x.cols()});
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c) y[c] += x(r, c);
  y *= 1.0 / static_cast<double>(x.rows());
  return y;
}

Tensor mean_rows_backward(const Tensor& grad_out, std::size_t rows) {
  Tensor g({rows, grad_out.size()});
  const double scale = 1.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < grad_out.size(); ++c) g(r, c) = grad_out[c] * scale;
  return g;
}

}  // namespace mambatrack::ops
