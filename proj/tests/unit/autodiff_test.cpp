#include <gtest/gtest.h>

#include "gradient_cases.hpp"
#include "mambatrack/autodiff.hpp"
#include "mambatrack/ssm.hpp"

using namespace mambatrack;
using namespace mambatrack::test_support;

TEST(Autodiff, SumOfSquaresGradient) {
  const Tensor x = Tensor::matrix(2, 2, {1, -2, 3, 0.5});
  ad::Tape tape;
  const ad::Var v = tape.parameter(x);
  tape.backward(ad::sum_squares(tape, v));
  const Tensor g = tape.parameter_grad(x);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(g[i], 2 * x[i]);
}

TEST(Autodiff, ConstantFunctionHasZeroGradient) {
  const Tensor x = Tensor::matrix(1, 3, {1, 2, 3});
  ad::Tape tape;
  const ad::Var v = tape.parameter(x);
  const ad::Var c = tape.constant(Tensor::matrix(1, 3, {4, 5, 6}));
  tape.backward(ad::sum_squares(tape, c));
  const Tensor gx = tape.parameter_grad(x), gv = tape.grad(v);
  for (double g : gx.values()) EXPECT_EQ(g, 0.0);
  for (double g : gv.values()) EXPECT_EQ(g, 0.0);
  // Never-bound tensors report zeros of their own shape.
  const Tensor other({2, 5});
  EXPECT_EQ(tape.parameter_grad(other).size(), 10u);
}

TEST(Autodiff, SharedParameterAccumulates) {
  const Tensor x = Tensor::vector({3.0});
  ad::Tape tape;
  const ad::Var a = tape.parameter(x);
  const ad::Var b = tape.parameter(x);
  EXPECT_EQ(a.id, b.id);
  // f = (x*x)^2 = x^4, f' = 4 x^3 = 108.
  tape.backward(ad::sum_squares(tape, ad::hadamard(tape, a, b)));
  EXPECT_EQ(tape.parameter_grad(x)[0], 108.0);
}

TEST(Autodiff, SeedScalesGradient) {
  const Tensor x = Tensor::vector({1.5, -1});
  ad::Tape tape;
  const ad::Var v = tape.parameter(x);
  tape.backward(ad::sum_squares(tape, v), 0.25);
  EXPECT_EQ(tape.parameter_grad(x)[0], 0.75);
}

class PrimitiveGradient : public ::testing::TestWithParam<std::size_t> {};

TEST_P(PrimitiveGradient, MatchesCentralDifferences) {
  auto cases = gradient_cases();
  GradientCase& c = cases[GetParam()];
  EXPECT_LT(gradient_check(c.build, c.inputs), 1e-4) << c.name;
}

INSTANTIATE_TEST_SUITE_P(AllPrimitives, PrimitiveGradient,
                         ::testing::Range<std::size_t>(0, gradient_cases().size()),
                         [](const ::testing::TestParamInfo<std::size_t>& info) {
                           return gradient_cases()[info.param].name;
                         });

TEST(Autodiff, SelectiveScanBackwardMatchesTape) {
  std::mt19937_64 rng(3);
  const Tensor A = random_tensor({2, 3}, rng, -2, -0.5), u = random_tensor({4, 2}, rng);
  const Tensor dt = random_tensor({4, 2}, rng, 0.2, 1.0), B = random_tensor({4, 3}, rng);
  const Tensor C = random_tensor({4, 3}, rng), D = random_tensor({2}, rng);
  const Tensor g = random_tensor({4, 2}, rng);
  const SelectiveScanGrads direct = selective_ssm_scan_backward({A, u, dt, B, C, D}, g);

  ad::Tape tape;
  const ad::Var y = ad::selective_scan(tape, tape.parameter(A), tape.parameter(u), tape.parameter(dt),
                                       tape.parameter(B), tape.parameter(C), tape.parameter(D));
  // 4 * mean over the 4 rows, summed over columns, is <g, y>.
  const ad::Var lin = ad::mean_rows(tape, ad::hadamard(tape, y, tape.constant(g)));
  const ad::Var total = ad::affine(tape, lin, tape.constant(Tensor({1, 2}, 4.0)), std::nullopt);
  tape.backward(total);
  EXPECT_LT(max_abs_diff(tape.parameter_grad(A), direct.A), 1e-14);
  EXPECT_LT(max_abs_diff(tape.parameter_grad(dt), direct.delta), 1e-14);
  EXPECT_LT(max_abs_diff(tape.parameter_grad(u), direct.u), 1e-14);
}

TEST(Autodiff, TapeBlocksMatchPlainForwardExactly) {
  Rng rng(5);
  std::mt19937_64 drng(6);
  const BiMambaParams p = init_bi_mamba_block(tiny_dims(), 6, rng);
  const Tensor X = random_tensor({5, 3}, drng);
  ad::Tape tape;
  const ad::Var y = ad::bi_mamba_block(tape, p, tape.constant(X));
  EXPECT_EQ(tape.value(y), bi_mamba_block(p, X));
  ad::Tape tape2;
  EXPECT_EQ(tape2.value(ad::mamba_block(tape2, p.forward, tape2.constant(X))), mamba_block(p.forward, X));
}

TEST(Autodiff, FullModelGradient) {
  MtpModel model = init_mtp_model(MtpConfig::with_width(8, 1, 4), 21);
  std::mt19937_64 rng(22);
  const WindowSample s = random_window(4, rng);
  EXPECT_LT(model_gradient_check(model, s), 1e-4);
}
