#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "gradient_cases.hpp"
#include "mambatrack/train.hpp"

using namespace mambatrack;

namespace {

Tracklet track_with_frames(int id, int first, int last, double vx = 0.0) {
  Tracklet t;
  t.id = id;
  for (int f = first; f <= last; ++f) t.append({f, {100 + vx * f, 100, 20, 40}, BoxSource::detected, 1});
  return t;
}

}  // namespace

TEST(SmoothL1, FormulaArithmetic) {
  EXPECT_EQ(smooth_l1_loss({1, 2, 3, 4}, {1, 2, 3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(smooth_l1_loss({0.5, 0.5, 0.5, 0.5}, {}), 0.125);
  EXPECT_DOUBLE_EQ(smooth_l1_loss({2, -2, 2, -2}, {}), 1.5);
  EXPECT_GT(smooth_l1_loss({1e-9, 0, 0, 0}, {}), 0.0);
}

TEST(LrSchedule, PaperValues) {
  TrainConfig c;
  const double peak = std::pow(512.0, -0.5) * std::pow(4000.0, -0.5);
  EXPECT_NEAR(lr_at(4000, c), peak, 1e-9 * peak);
  EXPECT_NEAR(lr_at(4000, c), 6.9877e-4, 1e-8);
  const double first = std::pow(512.0, -0.5) * std::pow(4000.0, -1.5);
  EXPECT_NEAR(lr_at(1, c), first, 1e-9 * first);
  EXPECT_NEAR(lr_at(1, c), 1.747e-7, 1e-10);
  EXPECT_THROW(lr_at(0, c), DomainError);
}

TEST(LrSchedule, ShapeAndContinuity) {
  TrainConfig c;
  for (std::size_t w = 1; w < 4000; w += 37) EXPECT_LT(lr_at(w, c), lr_at(w + 1, c));
  for (std::size_t w = 4000; w < 20000; w += 101) EXPECT_GT(lr_at(w, c), lr_at(w + 1, c));
  const double w = c.w_warmup;
  EXPECT_NEAR(std::pow(w, -0.5) / (w * std::pow(w, -1.5)), 1.0, 1e-15);
}

TEST(Adam, ZeroGradientKeepsParameters) {
  Tensor p = Tensor::vector({1.0, -2.0});
  std::vector<Tensor*> params{&p};
  AdamState s = make_adam_state(params);
  s.first_moment[0] = Tensor::vector({0.5, 0.5});
  s.second_moment[0] = Tensor::vector({0.25, 0.25});
  const std::vector<Tensor> g{Tensor::vector({0.0, 0.0})};
  adam_step(params, g, s, 0.0, 0.9, 0.98, 1e-8);
  EXPECT_EQ(p, Tensor::vector({1.0, -2.0}));
  EXPECT_DOUBLE_EQ(s.first_moment[0][0], 0.45);
  EXPECT_DOUBLE_EQ(s.second_moment[0][0], 0.245);
}

TEST(Adam, FirstStepClosedForm) {
  Tensor p = Tensor::vector({1.0, 1.0, 1.0});
  std::vector<Tensor*> params{&p};
  AdamState s = make_adam_state(params);
  const std::vector<Tensor> g{Tensor::vector({0.3, -4.0, 1e-3})};
  const double lr = 0.01, eps = 1e-8;
  adam_step(params, g, s, lr, 0.9, 0.98, eps);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_NEAR(p[i], 1.0 - lr * g[0][i] / (std::abs(g[0][i]) + eps), 1e-15);
  EXPECT_EQ(s.step, 1u);
}

TEST(Adam, TwoStepsUnrolled) {
  Tensor p = Tensor::vector({0.5});
  std::vector<Tensor*> params{&p};
  AdamState s = make_adam_state(params);
  const std::vector<Tensor> g{Tensor::vector({0.2})};
  const double lr = 0.1, b1 = 0.9, b2 = 0.98, eps = 1e-8;
  adam_step(params, g, s, lr, b1, b2, eps);
  adam_step(params, g, s, lr, b1, b2, eps);
  double x = 0.5, m = 0, v = 0;
  for (int t = 1; t <= 2; ++t) {
    m = b1 * m + (1 - b1) * 0.2;
    v = b2 * v + (1 - b2) * 0.04;
    x -= lr * (m / (1 - std::pow(b1, t))) / (std::sqrt(v / (1 - std::pow(b2, t))) + eps);
  }
  EXPECT_NEAR(p[0], x, 1e-15);
}

TEST(Adam, ShapeMismatchThrows) {
  Tensor p = Tensor::vector({0.5, 1});
  std::vector<Tensor*> params{&p};
  AdamState s = make_adam_state(params);
  const std::vector<Tensor> g{Tensor::vector({0.2})};
  EXPECT_THROW(adam_step(params, g, s, 0.1, 0.9, 0.98, 1e-8), ShapeError);
}

TEST(Windows, CountingAndRuns) {
  const ImageSize img;
  EXPECT_EQ(build_windows({track_with_frames(1, 1, 12)}, 10, img).size(), 1u);
  EXPECT_EQ(build_windows({track_with_frames(1, 1, 11)}, 10, img).size(), 0u);
  EXPECT_EQ(build_windows({track_with_frames(1, 5, 30)}, 10, img).size(), 15u);
  // A gap splits the identity into independent runs.
  Tracklet gap = track_with_frames(2, 1, 12);
  for (int f = 20; f <= 32; ++f) gap.append({f, {0, 0, 5, 5}, BoxSource::detected, 1});
  EXPECT_EQ(build_windows({gap}, 10, img).size(), 3u);
}

TEST(Windows, TargetIsNextDelta) {
  const ImageSize img{100, 100};
  const auto w = build_windows({track_with_frames(1, 1, 12, 2.0)}, 10, img);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].feature.real_count(), 10u);
  for (const MotionDelta& d : w[0].feature.deltas) EXPECT_NEAR(d.dcx, 0.02, 1e-15);
  EXPECT_NEAR(w[0].target.dcx, 0.02, 1e-15);

  for (const WindowSample& s : build_windows({track_with_frames(1, 1, 15)}, 10, img)) {
    for (const MotionDelta& d : s.feature.deltas) EXPECT_EQ(d, MotionDelta{});
    EXPECT_EQ(s.target, MotionDelta{});
  }
}

TEST(Train, StepCountAndErrors) {
  TrainConfig cfg;
  cfg.d_m = 8;
  cfg.L = 1;
  cfg.q = 4;
  MtpModel m = init_mtp_model(cfg.model_config(), 0);
  std::mt19937_64 rng(1);
  std::vector<WindowSample> data;
  for (int i = 0; i < 64; ++i) data.push_back(test_support::random_window(4, rng));
  EXPECT_EQ(train(data, cfg, m).curve.size(), 1u);
  cfg.batch_size = 30;
  EXPECT_EQ(train(data, cfg, m).curve.size(), 3u);
  EXPECT_THROW(train({}, cfg, m), DomainError);
  std::vector<WindowSample> wrong{test_support::random_window(5, rng)};
  EXPECT_THROW(train(wrong, cfg, m), DomainError);
}

TEST(Train, IdenticalSamplesLossDecreases) {
  TrainConfig cfg;
  cfg.d_m = 32;
  cfg.L = 1;
  cfg.q = 10;
  cfg.batch_size = 8;
  cfg.epochs = 10;
  MtpModel m = init_mtp_model(cfg.model_config(), 3);
  std::mt19937_64 rng(4);
  const WindowSample s = test_support::random_window(10, rng);
  const std::vector<WindowSample> data(8, s);
  const TrainResult r = train(data, cfg, m);
  ASSERT_EQ(r.curve.size(), 10u);
  for (std::size_t i = 1; i < r.curve.size(); ++i) EXPECT_LT(r.curve[i].loss, r.curve[i - 1].loss) << i;
}

TEST(Train, SeededRunsAreBitIdentical) {
  TrainConfig cfg;
  cfg.d_m = 8;
  cfg.L = 1;
  cfg.q = 4;
  cfg.batch_size = 5;
  cfg.epochs = 2;
  cfg.seed = 9;
  std::mt19937_64 rng(5);
  std::vector<WindowSample> data;
  for (int i = 0; i < 23; ++i) data.push_back(test_support::random_window(4, rng));
  MtpModel a = init_mtp_model(cfg.model_config(), 9), b = init_mtp_model(cfg.model_config(), 9);
  const TrainResult ra = train(data, cfg, a), rb = train(data, cfg, b);
  std::vector<Tensor*> pa = parameter_list(a), pb = parameter_list(b);
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(*pa[i], *pb[i]);
  for (std::size_t i = 0; i < ra.curve.size(); ++i) EXPECT_EQ(ra.curve[i].loss, rb.curve[i].loss);
}

TEST(Train, BatchGradientIsMeanOfSampleGradients) {
  MtpModel m = init_mtp_model(MtpConfig::with_width(8, 1, 4), 6);
  std::mt19937_64 rng(7);
  const std::vector<WindowSample> batch{test_support::random_window(4, rng), test_support::random_window(4, rng)};
  const auto g = batch_gradient(m, batch);
  const auto g0 = batch_gradient(m, std::span(batch).subspan(0, 1));
  const auto g1 = batch_gradient(m, std::span(batch).subspan(1, 1));
  for (std::size_t k = 0; k < g.size(); ++k)
    for (std::size_t i = 0; i < g[k].size(); ++i) EXPECT_NEAR(g[k][i], 0.5 * (g0[k][i] + g1[k][i]), 1e-15);
}

TEST(Train, LossCsvFormat) {
  const std::string path = ::testing::TempDir() + "loss.csv";
  write_loss_csv({{1, 1.5e-7, 0.25}, {2, 3e-7, 0.125}}, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "step,lr,loss\n1,1.5000000000e-07,2.5000000000e-01\n2,3.0000000000e-07,1.2500000000e-01\n");
}

TEST(Train, ZeroMotionLoss) {
  const std::vector<WindowSample> s{{TrajFeature::from_deltas({}, 2), {0.5, 0.5, 0.5, 0.5}}};
  EXPECT_DOUBLE_EQ(zero_motion_loss(s), 0.125);
}
