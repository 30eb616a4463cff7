#pragma once

#include <cstddef>
#include <ostream>
#include <vector>

#include "mambatrack/mot_io.hpp"

namespace mambatrack {

struct ClearCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t idsw = 0;
  std::size_t gt_total = 0;
  double mota = 1.0;
};

struct IdCounts {
  std::size_t idtp = 0;
  std::size_t idfp = 0;
  std::size_t idfn = 0;
  double idf1 = 1.0;
};

// Frame-by-frame CLEAR matching. Correspondences from earlier frames are kept
// while they overlap by at least iou_min; the rest are matched by Hungarian
// on 1 - IoU, again requiring IoU >= iou_min.
ClearCounts clear_mot(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& result,
                      double iou_min = 0.5);

// Global one-to-one identity matching maximizing the number of frames in
// which a gt and a result identity overlap by at least iou_min.
IdCounts idf1(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& result,
              double iou_min = 0.5);

struct MetricReport {
  ClearCounts clear;
  IdCounts id;
};

MetricReport evaluate(const std::vector<MotRecord>& gt, const std::vector<MotRecord>& result,
                      double iou_min = 0.5);

void write_report_table(std::ostream& out, const MetricReport& report);
// "metric,value" lines preceded by that header.
void write_report_csv(std::ostream& out, const MetricReport& report);

}  // namespace mambatrack
