#include "mambatrack/autodiff.hpp"

#include <cmath>

#include "mambatrack/primitives.hpp"
#include "mambatrack/ssm.hpp"

namespace mambatrack::ad {

Var Tape::constant(Tensor value) {
  Node n;
  n.owned = std::move(value);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

Var Tape::parameter(const Tensor& tensor) {
  if (auto it = bound_.find(&tensor); it != bound_.end()) return {it->second};
  Node n;
  n.external = &tensor;
  n.needs_grad = true;
  nodes_.push_back(std::move(n));
  bound_.emplace(&tensor, nodes_.size() - 1);
  return {nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::vector<Var> inputs, BackwardFn backward) {
  Node n;
  n.owned = std::move(value);
  n.inputs.reserve(inputs.size());
  for (Var v : inputs) {
    if (v.id >= nodes_.size()) throw Error("tape: input recorded after its consumer");
    n.inputs.push_back(v.id);
    n.needs_grad = n.needs_grad || nodes_[v.id].needs_grad;
  }
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return {nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const { return nodes_.at(v.id).value(); }

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.size() == 0) return Tensor::zeros_like(n.value());
  return n.grad;
}

Tensor Tape::parameter_grad(const Tensor& tensor) const {
  auto it = bound_.find(&tensor);
  if (it == bound_.end()) return Tensor::zeros_like(tensor);
  return grad({it->second});
}

void Tape::backward(Var root, double seed) {
  if (value(root).size() != 1) throw ShapeError("backward: root must be a scalar");
  for (Node& n : nodes_) n.grad = Tensor();
  nodes_[root.id].grad = Tensor(value(root).dims(), seed);

  std::vector<const Tensor*> inputs;
  std::vector<Tensor*> input_grads;
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || !n.needs_grad || n.grad.size() == 0) continue;
    inputs.clear();
    input_grads.clear();
    for (std::size_t in : n.inputs) {
      Node& src = nodes_[in];
      inputs.push_back(&src.value());
      if (src.needs_grad) {
        if (src.grad.size() == 0) src.grad = Tensor::zeros_like(src.value());
        input_grads.push_back(&src.grad);
      } else {
        input_grads.push_back(nullptr);
      }
    }
    n.backward(BackwardContext{inputs, n.value(), n.grad, input_grads});
  }
}

namespace {

void accumulate(Tensor* dst, const Tensor& g) {
  if (dst) *dst += g;
}

}  // namespace

Var affine(Tape& t, Var x, Var weight, std::optional<Var> bias) {
  const Tensor* b = bias ? &t.value(*bias) : nullptr;
  Tensor y = ops::affine(t.value(x), t.value(weight), b);
  std::vector<Var> inputs{x, weight};
  if (bias) inputs.push_back(*bias);
  return t.record(std::move(y), std::move(inputs), [](const BackwardContext& c) {
    const bool has_bias = c.inputs.size() == 3;
    auto g = ops::affine_backward(*c.inputs[0], *c.inputs[1], has_bias, c.grad_out);
    accumulate(c.input_grads[0], g.input);
    accumulate(c.input_grads[1], g.weight);
    if (has_bias) accumulate(c.input_grads[2], g.bias);
  });
}

Var linear(Tape& t, const Linear& lin, Var x) {
  std::optional<Var> bias;
  if (lin.has_bias()) bias = t.parameter(lin.bias);
  return affine(t, x, t.parameter(lin.weight), bias);
}

Var silu(Tape& t, Var x) {
  return t.record(ops::silu(t.value(x)), {x}, [](const BackwardContext& c) {
    accumulate(c.input_grads[0], ops::silu_backward(*c.inputs[0], c.grad_out));
  });
}

Var softplus(Tape& t, Var x) {
  return t.record(ops::softplus(t.value(x)), {x}, [](const BackwardContext& c) {
    accumulate(c.input_grads[0], ops::softplus_backward(*c.inputs[0], c.grad_out));
  });
}

Var neg_exp(Tape& t, Var x) {
  return t.record(ops::neg_exp(t.value(x)), {x}, [](const BackwardContext& c) {
    accumulate(c.input_grads[0], ops::neg_exp_backward(c.output, c.grad_out));
  });
}

Var add(Tape& t, Var a, Var b) {
  return t.record(ops::add(t.value(a), t.value(b)), {a, b}, [](const BackwardContext& c) {
    accumulate(c.input_grads[0], c.grad_out);
    accumulate(c.input_grads[1], c.grad_out);
  });
}

Var hadamard(Tape& t, Var a, Var b) {
  return t.record(ops::hadamard(t.value(a), t.value(b)), {a, b}, [](const BackwardContext& c) {
    if (c.input_grads[0]) accumulate(c.input_grads[0], ops::hadamard(c.grad_out, *c.inputs[1]));
    if (c.input_grads[1]) accumulate(c.input_grads[1], ops::hadamard(c.grad_out, *c.inputs[0]));
  });
}

Var layer_norm(Tape& t, Var x, Var gamma, Var beta) {
  Tensor y = ops::layer_norm(t.value(x), t.value(gamma), t.value(beta));
  return t.record(std::move(y), {x, gamma, beta}, [](const BackwardContext& c) {
    auto g = ops::layer_norm_backward(*c.inputs[0], *c.inputs[1], c.grad_out);
    accumulate(c.input_grads[0], g.input);
    accumulate(c.input_grads[1], g.gamma);
    accumulate(c.input_grads[2], g.beta);
  });
}

Var depthwise_causal_conv(Tape& t, Var x, Var weight, Var bias) {
  Tensor y = ops::depthwise_causal_conv(t.value(x), t.value(weight), t.value(bias));
  return t.record(std::move(y), {x, weight, bias}, [](const BackwardContext& c) {
    auto g = ops::depthwise_causal_conv_backward(*c.inputs[0], *c.inputs[1], c.grad_out);
    accumulate(c.input_grads[0], g.input);
    accumulate(c.input_grads[1], g.weight);
    accumulate(c.input_grads[2], g.bias);
  });
}

Var selective_scan(Tape& t, Var A, Var u, Var delta, Var B, Var C, Var D_skip) {
  Tensor y = selective_ssm_scan(
      {t.value(A), t.value(u), t.value(delta), t.value(B), t.value(C), t.value(D_skip)});
  return t.record(std::move(y), {A, u, delta, B, C, D_skip}, [](const BackwardContext& c) {
    const SelectiveScanInputs in{*c.inputs[0], *c.inputs[1], *c.inputs[2],
                                 *c.inputs[3], *c.inputs[4], *c.inputs[5]};
    auto g = selective_ssm_scan_backward(in, c.grad_out);
    accumulate(c.input_grads[0], g.A);
    accumulate(c.input_grads[1], g.u);
    accumulate(c.input_grads[2], g.delta);
    accumulate(c.input_grads[3], g.B);
    accumulate(c.input_grads[4], g.C);
    accumulate(c.input_grads[5], g.D_skip);
  });
}

Var reverse_time(Tape& t, Var x) {
  return t.record(ops::reverse_time(t.value(x)), {x}, [](const BackwardContext& c) {
    accumulate(c.input_grads[0], ops::reverse_time(c.grad_out));
  });
}

Var slice_cols(Tape& t, Var x, std::size_t begin, std::size_t end) {
  return t.record(ops::slice_cols(t.value(x), begin, end), {x},
                  [begin](const BackwardContext& c) {
                    accumulate(c.input_grads[0],
                               ops::slice_cols_backward(c.grad_out, c.inputs[0]->cols(), begin));
                  });
}

Var mean_rows(Tape& t, Var x) {
  return t.record(ops::mean_rows(t.value(x)), {x}, [](const BackwardContext& c) {
    accumulate(c.input_grads[0], ops::mean_rows_backward(c.grad_out, c.inputs[0]->rows()));
  });
}

Var sum_squares(Tape& t, Var x) {
  const Tensor& v = t.value(x);
  double s = 0.0;
  for (double e : v.values()) s += e * e;
  return t.record(Tensor({1}, s), {x}, [](const BackwardContext& c) {
    if (!c.input_grads[0]) return;
    Tensor g = *c.inputs[0];
    g *= 2.0 * c.grad_out[0];
    *c.input_grads[0] += g;
  });
}

Var scale(Tape& t, Var x, double factor) {
  Tensor y = t.value(x);
  y *= factor;
  return t.record(std::move(y), {x}, [factor](const BackwardContext& c) {
    if (!c.input_grads[0]) return;
    Tensor g = c.grad_out;
    g *= factor;
    *c.input_grads[0] += g;
  });
}

Var smooth_l1(Tape& t, Var pred, const Tensor& target) {
  const Tensor& p = t.value(pred);
  if (p.size() != target.size()) throw ShapeError("smooth_l1: prediction/target size mismatch");
  const double n = static_cast<double>(p.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - target[i];
    loss += std::abs(d) < 1.0 ? 0.5 * d * d : std::abs(d) - 0.5;
  }
  return t.record(Tensor({1}, loss / n), {pred}, [target, n](const BackwardContext& c) {
    if (!c.input_grads[0]) return;
    const Tensor& pv = *c.inputs[0];
    Tensor g = Tensor::zeros_like(pv);
    for (std::size_t i = 0; i < pv.size(); ++i) {
      const double d = pv[i] - target[i];
      const double dk = std::abs(d) < 1.0 ? d : (d > 0.0 ? 1.0 : -1.0);
      g[i] = c.grad_out[0] * dk / n;
    }
    *c.input_grads[0] += g;
  });
}

Var mamba_block(Tape& t, const MambaBlockParams& p, Var X) {
  const std::size_t di = p.conv_weight.rows();
  const Var xz = linear(t, p.in_proj, X);
  const Var x = slice_cols(t, xz, 0, di);
  const Var z = slice_cols(t, xz, di, 2 * di);
  const Var xc = silu(t, depthwise_causal_conv(t, x, t.parameter(p.conv_weight),
                                               t.parameter(p.conv_bias)));
  const Var dt = softplus(t, linear(t, p.dt_up, linear(t, p.dt_down, xc)));
  const Var B = linear(t, p.B_proj, xc);
  const Var C = linear(t, p.C_proj, xc);
  const Var A = neg_exp(t, t.parameter(p.A_log));
  const Var y = selective_scan(t, A, xc, dt, B, C, t.parameter(p.D_skip));
  return linear(t, p.out_proj, hadamard(t, y, silu(t, z)));
}

Var bi_mamba_block(Tape& t, const BiMambaParams& p, Var X) {
  const Var xf = mamba_block(t, p.forward, X);
  const Var xb = reverse_time(t, mamba_block(t, p.backward, reverse_time(t, X)));
  const Var y_hat = add(t, xf, xb);
  const Var mlp = linear(t, p.mlp_out, silu(t, linear(t, p.mlp_in, y_hat)));
  return add(t, y_hat,
             layer_norm(t, mlp, t.parameter(p.norm_gamma), t.parameter(p.norm_beta)));
}

}  // namespace mambatrack::ad
