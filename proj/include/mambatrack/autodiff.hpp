#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "mambatrack/mamba.hpp"
#include "mambatrack/tensor.hpp"

// Tape-based reverse-mode differentiation over the primitives in ops:: and
// the selective scan.
namespace mambatrack::ad {

struct Var {
  std::size_t id = 0;
};

struct BackwardContext {
  std::span<const Tensor* const> inputs;
  const Tensor& output;
  const Tensor& grad_out;
  // Accumulate into these; an entry is null when that input needs no gradient.
  std::span<Tensor* const> input_grads;
};

using BackwardFn = std::function<void(const BackwardContext&)>;

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf holding a copy of `value`; never receives a gradient.
  Var constant(Tensor value);
  // Leaf bound to an external tensor, which must outlive the tape. Binding
  // the same tensor twice returns the same node.
  Var parameter(const Tensor& tensor);

  Var record(Tensor value, std::vector<Var> inputs, BackwardFn backward);

  const Tensor& value(Var v) const;
  // Gradient of the last backward() root w.r.t. `v`; zero-filled when no path exists.
  Tensor grad(Var v) const;
  // Gradient for a bound parameter; zero-filled when the tensor was never bound.
  Tensor parameter_grad(const Tensor& tensor) const;

  // Reverse sweep from a scalar root seeded with `seed`. Visits every node once.
  void backward(Var root, double seed = 1.0);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor owned;
    const Tensor* external = nullptr;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    bool needs_grad = false;
    Tensor grad;
    const Tensor& value() const { return external ? *external : owned; }
  };
  std::vector<Node> nodes_;
  std::unordered_map<const Tensor*, std::size_t> bound_;
};

Var affine(Tape& t, Var x, Var weight, std::optional<Var> bias);
Var linear(Tape& t, const Linear& lin, Var x);
Var silu(Tape& t, Var x);
Var softplus(Tape& t, Var x);
Var neg_exp(Tape& t, Var x);
Var add(Tape& t, Var a, Var b);
Var hadamard(Tape& t, Var a, Var b);
Var layer_norm(Tape& t, Var x, Var gamma, Var beta);
Var depthwise_causal_conv(Tape& t, Var x, Var weight, Var bias);
Var selective_scan(Tape& t, Var A, Var u, Var delta, Var B, Var C, Var D_skip);
Var reverse_time(Tape& t, Var x);
Var slice_cols(Tape& t, Var x, std::size_t begin, std::size_t end);
Var mean_rows(Tape& t, Var x);
Var sum_squares(Tape& t, Var x);
Var scale(Tape& t, Var x, double factor);
// Mean over elements of the smooth-L1 (beta = 1) kernel of pred - target.
Var smooth_l1(Tape& t, Var pred, const Tensor& target);

// Differentiable counterparts of mamba_block / bi_mamba_block; identical
// arithmetic, so values match the plain forward bit for bit.
Var mamba_block(Tape& t, const MambaBlockParams& params, Var X);
Var bi_mamba_block(Tape& t, const BiMambaParams& params, Var X);

}  // namespace mambatrack::ad
