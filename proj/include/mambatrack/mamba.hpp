#pragma once

#include <cstddef>
#include <random>
#include <string>

#include "mambatrack/tensor.hpp"

namespace mambatrack {

// y = x W^T + b. An empty bias tensor means no bias term.
struct Linear {
  Tensor weight;  // out x in
  Tensor bias;    // out, or empty

  bool has_bias() const { return bias.size() != 0; }
  Tensor operator()(const Tensor& x) const;
};

struct MambaDims {
  std::size_t d_model = 512;
  std::size_t expand = 2;
  std::size_t d_state = 16;
  std::size_t conv_width = 4;

  std::size_t d_inner() const { return expand * d_model; }
  // ceil(d_inner / 16)
  std::size_t dt_rank() const { return (d_inner() + 15) / 16; }
};

struct MambaBlockParams {
  Linear in_proj;       // d_model -> 2 d_inner (x branch, gate branch)
  Tensor conv_weight;   // d_inner x K
  Tensor conv_bias;     // d_inner
  Linear dt_down;       // d_inner -> dt_rank, no bias
  Linear dt_up;         // dt_rank -> d_inner
  Linear B_proj;        // d_inner -> N
  Linear C_proj;        // d_inner -> N
  Tensor A_log;         // d_inner x N, A = -exp(A_log)
  Tensor D_skip;        // d_inner
  Linear out_proj;      // d_inner -> d_model
};

struct BiMambaParams {
  MambaBlockParams forward;
  MambaBlockParams backward;
  Linear mlp_in;        // d_model -> d_mlp
  Linear mlp_out;       // d_mlp -> d_model
  Tensor norm_gamma;    // d_model
  Tensor norm_beta;     // d_model
};

struct EncoderActivations {
  Tensor x_forward;
  Tensor x_backward;
  Tensor y_hat;
  Tensor x_l;
};

using Rng = std::mt19937_64;

// Affine weights and biases ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)); A_log so that
// A[c,n] = -(n+1); D_skip = 1.
MambaBlockParams init_mamba_block(const MambaDims& dims, Rng& rng);
BiMambaParams init_bi_mamba_block(const MambaDims& dims, std::size_t d_mlp, Rng& rng);
Linear init_linear(std::size_t in, std::size_t out, bool bias, Rng& rng);

// Gated selective-SSM block; causal in time. X: q x d_model.
Tensor mamba_block(const MambaBlockParams& params, const Tensor& X);

// X_l = Y + LN(MLP(Y)), Y = Mamba_fwd(X) + reverse(Mamba_bwd(reverse(X))).
Tensor bi_mamba_block(const BiMambaParams& params, const Tensor& X,
                      EncoderActivations* activations = nullptr);

// Visits every tensor of a parameter set with a dotted name, in a fixed order.
template <typename Block, typename F>
void visit_linear(Block& lin, const std::string& name, F&& f) {
  f(name + ".weight", lin.weight);
  if (lin.has_bias()) f(name + ".bias", lin.bias);
}

template <typename Params, typename F>
void visit_mamba_block(Params& p, const std::string& prefix, F&& f) {
  visit_linear(p.in_proj, prefix + ".in_proj", f);
  f(prefix + ".conv.weight", p.conv_weight);
  f(prefix + ".conv.bias", p.conv_bias);
  visit_linear(p.dt_down, prefix + ".dt_down", f);
  visit_linear(p.dt_up, prefix + ".dt_up", f);
  visit_linear(p.B_proj, prefix + ".B_proj", f);
  visit_linear(p.C_proj, prefix + ".C_proj", f);
  f(prefix + ".A_log", p.A_log);
  f(prefix + ".D_skip", p.D_skip);
  visit_linear(p.out_proj, prefix + ".out_proj", f);
}

template <typename Params, typename F>
void visit_bi_mamba_block(Params& p, const std::string& prefix, F&& f) {
  visit_mamba_block(p.forward, prefix + ".fwd", f);
  visit_mamba_block(p.backward, prefix + ".bwd", f);
  visit_linear(p.mlp_in, prefix + ".mlp_in", f);
  visit_linear(p.mlp_out, prefix + ".mlp_out", f);
  f(prefix + ".norm.gamma", p.norm_gamma);
  f(prefix + ".norm.beta", p.norm_beta);
}

}  // namespace mambatrack
