#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "mambatrack/metrics.hpp"

using namespace mambatrack;

namespace {

// Two objects moving apart along x for `frames` frames.
std::vector<MotRecord> two_objects(int frames) {
  std::vector<MotRecord> gt;
  for (int f = 1; f <= frames; ++f) {
    gt.push_back({f, 1, {10.0 + 3 * f, 100, 40, 80}, 1});
    gt.push_back({f, 2, {600.0 - 3 * f, 300, 40, 80}, 1});
  }
  return gt;
}

}  // namespace

TEST(Metrics, PerfectResult) {
  const auto gt = two_objects(10);
  const MetricReport r = evaluate(gt, gt);
  EXPECT_EQ(r.clear.mota, 1.0);
  EXPECT_EQ(r.clear.tp, 20u);
  EXPECT_EQ(r.clear.idsw, 0u);
  EXPECT_EQ(r.id.idf1, 1.0);
}

TEST(Metrics, OneMissOutOfTen) {
  std::vector<MotRecord> gt, res;
  for (int f = 1; f <= 10; ++f) {
    gt.push_back({f, 1, {0, 0, 10, 10}, 1});
    if (f != 5) res.push_back({f, 4, {0, 0, 10, 10}, 1});
  }
  const ClearCounts c = clear_mot(gt, res);
  EXPECT_EQ(c.fn, 1u);
  EXPECT_DOUBLE_EQ(c.mota, 0.9);
  const IdCounts id = idf1(gt, res);
  EXPECT_EQ(id.idtp, 9u);
  EXPECT_DOUBLE_EQ(id.idf1, 18.0 / 19.0);
}

TEST(Metrics, LabelSwapCountsOneSwitchPerObject) {
  auto gt = two_objects(10);
  auto res = gt;
  for (MotRecord& r : res)
    if (r.frame > 5) r.id = 3 - r.id;
  const MetricReport rep = evaluate(gt, res);
  EXPECT_EQ(rep.clear.idsw, 2u);
  EXPECT_DOUBLE_EQ(rep.clear.mota, 1.0 - 2.0 / 20.0);
  EXPECT_DOUBLE_EQ(rep.id.idf1, 0.5);
}

TEST(Metrics, FragmentedIdentityHalvesIdf1) {
  std::vector<MotRecord> gt, res;
  for (int f = 1; f <= 10; ++f) {
    gt.push_back({f, 1, {0, 0, 10, 10}, 1});
    res.push_back({f, f <= 5 ? 1 : 2, {0, 0, 10, 10}, 1});
  }
  EXPECT_DOUBLE_EQ(idf1(gt, res).idf1, 0.5);
  EXPECT_EQ(clear_mot(gt, res).idsw, 1u);
}

TEST(Metrics, EmptyResultAndFalsePositives) {
  const auto gt = two_objects(5);
  const MetricReport empty = evaluate(gt, {});
  EXPECT_EQ(empty.clear.mota, 0.0);
  EXPECT_EQ(empty.id.idf1, 0.0);
  EXPECT_EQ(empty.clear.fn, 10u);

  auto res = gt;
  res.push_back({3, 9, {900, 600, 20, 20}, 1});
  const ClearCounts c = clear_mot(gt, res);
  EXPECT_EQ(c.fp, 1u);
  EXPECT_DOUBLE_EQ(c.mota, 0.9);
  EXPECT_EQ(evaluate({}, {}).id.idf1, 1.0);
}

TEST(Metrics, IouThresholdGatesMatches) {
  const std::vector<MotRecord> gt = {{1, 1, {0, 0, 10, 10}, 1}};
  const std::vector<MotRecord> res = {{1, 1, {5, 0, 10, 10}, 1}};  // IoU 1/3
  EXPECT_EQ(clear_mot(gt, res, 0.5).tp, 0u);
  EXPECT_EQ(clear_mot(gt, res, 0.3).tp, 1u);
}

TEST(Metrics, InvariantToRelabellingAndOrder) {
  std::mt19937_64 rng(3);
  auto gt = two_objects(30);
  auto res = gt;
  std::normal_distribution<double> n(0, 4);
  for (MotRecord& r : res) {
    r.box.x += n(rng);
    if (r.frame % 11 == 0) r.id = 3 - r.id;
  }
  res.erase(res.begin() + 17);
  const MetricReport base = evaluate(gt, res);

  auto relabeled = res;
  for (MotRecord& r : relabeled) r.id = 100 + 7 * r.id;
  const MetricReport a = evaluate(gt, relabeled);
  EXPECT_EQ(a.clear.idsw, base.clear.idsw);
  EXPECT_EQ(a.clear.mota, base.clear.mota);
  EXPECT_EQ(a.id.idf1, base.id.idf1);

  auto shuffled = res;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  std::stable_sort(shuffled.begin(), shuffled.end(), [](auto& x, auto& y) { return x.frame < y.frame; });
  const MetricReport b = evaluate(gt, shuffled);
  EXPECT_EQ(b.clear.idsw, base.clear.idsw);
  EXPECT_EQ(b.clear.tp, base.clear.tp);
  EXPECT_EQ(b.id.idf1, base.id.idf1);
}

TEST(Metrics, ReportFormats) {
  const auto gt = two_objects(3);
  const MetricReport r = evaluate(gt, gt);
  std::ostringstream csv;
  write_report_csv(csv, r);
  EXPECT_EQ(csv.str().rfind("metric,value\nMOTA,1.000000\nIDF1,1.000000\nIDSW,0\n", 0), 0u) << csv.str();
  std::ostringstream table;
  write_report_table(table, r);
  EXPECT_NE(table.str().find("IDF1"), std::string::npos);
}
