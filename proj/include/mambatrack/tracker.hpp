#pragma once

#include <map>
#include <string>
#include <vector>

#include "mambatrack/core_types.hpp"
#include "mambatrack/kalman.hpp"
#include "mambatrack/mtp.hpp"

namespace mambatrack {

enum class MotionKind { mtp, kf, none };

MotionKind parse_motion_kind(const std::string& name);
std::string to_string(MotionKind kind);

struct TrackerConfig {
  double iou_threshold_stage1 = 0.3;
  double iou_threshold_stage2 = 0.3;
  double det_conf_min = 0.1;   // detections below are dropped before matching
  double t_thresh = 0.6;       // unmatched detections above spawn tracklets
  int t_terminate = 30;        // lost tracklets older than this are removed
  MotionKind motion = MotionKind::kf;
  bool tpm = true;             // second-stage re-finding with patched boxes
  bool refind_uses_detection = false;
  KalmanConfig kalman;
  ImageSize image;

  void validate() const;
};

struct TrackerState {
  std::vector<Tracklet> active;
  std::vector<Tracklet> lost;
  std::map<int, KfState> kalman;  // per tracklet id, kf motion only
  int next_id = 1;
  int frame = 0;
  bool initialized = false;
};

struct TrackRecord {
  int frame = 0;
  int id = 0;
  BBox box;
  BoxSource source = BoxSource::detected;
  double confidence = 1.0;
};

// Advances the tracker to `frame` with that frame's detections and returns
// the records of all active tracklets, ordered by id. The first call seeds
// one tracklet per detection. `model` is required for MotionKind::mtp.
std::vector<TrackRecord> step(TrackerState& state, int frame,
                              const std::vector<Detection>& detections, const MtpModel* model,
                              const TrackerConfig& cfg);

// Online tracking of a whole sequence, frames 1..max(frame) in order.
std::vector<TrackRecord> track_sequence(const std::vector<Detection>& detections,
                                        const MtpModel* model, const TrackerConfig& cfg);

}  // namespace mambatrack
