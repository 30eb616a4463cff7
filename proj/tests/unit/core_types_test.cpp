#include <gtest/gtest.h>

#include <random>

#include "mambatrack/core_types.hpp"

using namespace mambatrack;

TEST(CoreTypes, CenterConversionFormula) {
  EXPECT_EQ(bbox_to_center({0, 0, 10, 10}), (CenterBox{5, 5, 10, 10}));
  EXPECT_EQ(bbox_to_center({45, 45, 10, 10}), (CenterBox{50, 50, 10, 10}));
}

TEST(CoreTypes, CenterRoundTripOnRandomBoxes) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> pos(-500, 1500), ext(1, 300);
  for (int i = 0; i < 1000; ++i) {
    // Dyadic grid so the round trip is exact in binary floating point.
    const BBox b{std::round(pos(rng) * 64) / 64, std::round(pos(rng) * 64) / 64,
                 std::round(ext(rng) * 64) / 64, std::round(ext(rng) * 64) / 64};
    EXPECT_EQ(center_to_bbox(bbox_to_center(b)), b);
  }
}

TEST(CoreTypes, DeltaEncodeHandArithmetic) {
  const ImageSize img{100, 100};
  const MotionDelta d = delta_encode({45, 45, 10, 10}, {47, 46, 12, 10}, img);
  EXPECT_NEAR(d.dcx, 0.03, 1e-15);
  EXPECT_NEAR(d.dcy, 0.01, 1e-15);
  EXPECT_NEAR(d.dw, 0.02, 1e-15);
  EXPECT_EQ(d.dh, 0.0);
  EXPECT_EQ(delta_encode({3, 4, 5, 6}, {3, 4, 5, 6}, img), MotionDelta{});
}

TEST(CoreTypes, DeltaNormalizesByAxis) {
  const MotionDelta d = delta_encode({0, 0, 10, 10}, {12.8, 7.2, 10, 10}, ImageSize{1280, 720});
  EXPECT_NEAR(d.dcx, 0.01, 1e-15);
  EXPECT_NEAR(d.dcy, 0.01, 1e-15);
}

TEST(CoreTypes, DeltaApplyInvertsEncode) {
  const ImageSize img{100, 100};
  const BBox r = delta_apply({45, 45, 10, 10}, {0.03, 0.01, 0.02, 0.0}, img);
  EXPECT_NEAR(r.x, 47, 1e-12);
  EXPECT_NEAR(r.y, 46, 1e-12);
  EXPECT_NEAR(r.w, 12, 1e-12);
  EXPECT_NEAR(r.h, 10, 1e-12);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> pos(-200, 1400), ext(2, 400);
  const ImageSize hd;
  for (int i = 0; i < 1000; ++i) {
    const BBox a{pos(rng), pos(rng), ext(rng), ext(rng)};
    const BBox b{pos(rng), pos(rng), ext(rng), ext(rng)};
    const BBox back = delta_apply(a, delta_encode(a, b, hd), hd);
    EXPECT_NEAR(back.x, b.x, 1e-9 * std::max(1.0, std::abs(b.x)));
    EXPECT_NEAR(back.y, b.y, 1e-9 * std::max(1.0, std::abs(b.y)));
    EXPECT_NEAR(back.w, b.w, 1e-9 * b.w);
    EXPECT_NEAR(back.h, b.h, 1e-9 * b.h);
  }
}

TEST(CoreTypes, DeltaApplyZeroIsIdentityAndClamps) {
  const BBox b{12.5, -3, 40, 80};
  EXPECT_EQ(delta_apply(b, {}, ImageSize{}), b);
  const BBox squashed = delta_apply({0, 0, 10, 10}, {0, 0, -0.5, -0.5}, ImageSize{100, 100});
  EXPECT_EQ(squashed.h, 1.0);
  EXPECT_EQ(squashed.w, 1.0);
}

TEST(CoreTypes, TrajFeaturePadsOnTheLeft) {
  const std::vector<MotionDelta> recent{{0.1, 0, 0, 0}, {0.2, 0, 0, 0}};
  const TrajFeature f = TrajFeature::from_deltas(recent, 5);
  ASSERT_EQ(f.length(), 5u);
  EXPECT_EQ(f.real_count(), 2u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_FALSE(f.real[i]);
    EXPECT_EQ(f.deltas[i], MotionDelta{});
  }
  EXPECT_TRUE(f.real[3] && f.real[4]);
  EXPECT_EQ(f.deltas[4].dcx, 0.2);
  EXPECT_THROW(TrajFeature::from_deltas(std::vector<MotionDelta>(6), 5), Error);
}

TEST(CoreTypes, FeatureUsesLastQPlusOneBoxes) {
  std::vector<BBox> boxes;
  for (int i = 0; i < 20; ++i) boxes.push_back({10.0 * i, 0, 10, 10});
  const ImageSize img{100, 100};
  const TrajFeature f = feature_from_boxes(boxes, 4, img);
  ASSERT_EQ(f.length(), 4u);
  EXPECT_EQ(f.real_count(), 4u);
  for (const MotionDelta& d : f.deltas) EXPECT_NEAR(d.dcx, 0.1, 1e-15);

  const TrajFeature one = feature_from_boxes({boxes[0]}, 4, img);
  EXPECT_EQ(one.real_count(), 0u);
  const TrajFeature three = feature_from_boxes({boxes[0], boxes[1], boxes[2]}, 4, img);
  EXPECT_EQ(three.real_count(), 2u);
  EXPECT_FALSE(three.real[1]);
  EXPECT_TRUE(three.real[2]);
}

TEST(CoreTypes, TrackletFramesStrictlyIncrease) {
  Tracklet t;
  t.append({1, {}, BoxSource::detected, 1.0});
  t.append({3, {}, BoxSource::predicted, 1.0});
  EXPECT_THROW(t.append({3, {}, BoxSource::detected, 1.0}), DomainError);
  EXPECT_THROW(t.append({2, {}, BoxSource::detected, 1.0}), DomainError);
  EXPECT_EQ(t.last_frame(), 3);
}

TEST(CoreTypes, BoxValidity) {
  EXPECT_TRUE((BBox{0, 0, 1, 1}).valid());
  EXPECT_FALSE((BBox{0, 0, 0, 1}).valid());
  EXPECT_FALSE((BBox{0, 0, 1, -2}).valid());
  EXPECT_FALSE((BBox{std::nan(""), 0, 1, 1}).valid());
}
