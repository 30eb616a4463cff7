#include "mambatrack/mamba.hpp"

#include <cmath>

#include "mambatrack/primitives.hpp"
#include "mambatrack/ssm.hpp"

namespace mambatrack {

namespace {

Tensor uniform(std::vector<std::size_t> dims, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t(std::move(dims));
  for (double& v : t.values()) v = dist(rng);
  return t;
}

void require_width(const Tensor& X, std::size_t width, const char* what) {
  if (X.rank() != 2 || X.cols() != width || X.rows() == 0)
    throw ShapeError(std::string(what) + ": input " + X.shape_string() + " expects width " +
                     std::to_string(width));
}

}  // namespace

Tensor Linear::operator()(const Tensor& x) const {
  return ops::affine(x, weight, has_bias() ? &bias : nullptr);
}

Linear init_linear(std::size_t in, std::size_t out, bool bias, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Linear lin;
  lin.weight = uniform({out, in}, bound, rng);
  if (bias) lin.bias = uniform({out}, bound, rng);
  return lin;
}

MambaBlockParams init_mamba_block(const MambaDims& dims, Rng& rng) {
  const std::size_t di = dims.d_inner();
  const std::size_t n = dims.d_state;
  const double conv_bound = 1.0 / std::sqrt(static_cast<double>(dims.conv_width));
  MambaBlockParams p;
  p.in_proj = init_linear(dims.d_model, 2 * di, true, rng);
  p.conv_weight = uniform({di, dims.conv_width}, conv_bound, rng);
  p.conv_bias = uniform({di}, conv_bound, rng);
  p.dt_down = init_linear(di, dims.dt_rank(), false, rng);
  p.dt_up = init_linear(dims.dt_rank(), di, true, rng);
  p.B_proj = init_linear(di, n, true, rng);
  p.C_proj = init_linear(di, n, true, rng);
  p.A_log = Tensor({di, n});
  for (std::size_t c = 0; c < di; ++c)
    for (std::size_t s = 0; s < n; ++s) p.A_log(c, s) = std::log(static_cast<double>(s + 1));
  p.D_skip = Tensor({di}, 1.0);
  p.out_proj = init_linear(di, dims.d_model, true, rng);
  return p;
}

BiMambaParams init_bi_mamba_block(const MambaDims& dims, std::size_t d_mlp, Rng& rng) {
  BiMambaParams p;
  p.forward = init_mamba_block(dims, rng);
  p.backward = init_mamba_block(dims, rng);
  p.mlp_in = init_linear(dims.d_model, d_mlp, true, rng);
  p.mlp_out = init_linear(d_mlp, dims.d_model, true, rng);
  p.norm_gamma = Tensor({dims.d_model}, 1.0);
  p.norm_beta = Tensor({dims.d_model}, 0.0);
  return p;
}

Tensor mamba_block(const MambaBlockParams& params, const Tensor& X) {
  require_width(X, params.in_proj.weight.cols(), "mamba_block");
  const std::size_t di = params.conv_weight.rows();
  const Tensor xz = params.in_proj(X);
  const Tensor x = ops::slice_cols(xz, 0, di);
  const Tensor z = ops::slice_cols(xz, di, 2 * di);
  const Tensor xc = ops::silu(ops::depthwise_causal_conv(x, params.conv_weight, params.conv_bias));
  const Tensor dt = ops::softplus(params.dt_up(params.dt_down(xc)));
  const Tensor B = params.B_proj(xc);
  const Tensor C = params.C_proj(xc);
  const Tensor A = ops::neg_exp(params.A_log);
  const Tensor y = selective_ssm_scan({A, xc, dt, B, C, params.D_skip});
  return params.out_proj(ops::hadamard(y, ops::silu(z)));
}

Tensor bi_mamba_block(const BiMambaParams& params, const Tensor& X,
                      EncoderActivations* activations) {
  Tensor xf = mamba_block(params.forward, X);
  Tensor xb = ops::reverse_time(mamba_block(params.backward, ops::reverse_time(X)));
  Tensor y_hat = ops::add(xf, xb);
  const Tensor mlp = params.mlp_out(ops::silu(params.mlp_in(y_hat)));
  Tensor out = ops::add(y_hat, ops::layer_norm(mlp, params.norm_gamma, params.norm_beta));
  if (activations) {
    activations->x_forward = std::move(xf);
    activations->x_backward = std::move(xb);
    activations->y_hat = std::move(y_hat);
    activations->x_l = out;
  }
  return out;
}

}  // namespace mambatrack
