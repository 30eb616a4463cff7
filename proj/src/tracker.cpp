#include "mambatrack/tracker.hpp"

#include <algorithm>

#include "mambatrack/assignment.hpp"

namespace mambatrack {

MotionKind parse_motion_kind(const std::string& name) {
  if (name == "mtp") return MotionKind::mtp;
  if (name == "kf") return MotionKind::kf;
  if (name == "none") return MotionKind::none;
  throw DomainError("unknown motion model '" + name + "' (expected mtp, kf or none)");
}

std::string to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::mtp: return "mtp";
    case MotionKind::kf: return "kf";
    case MotionKind::none: return "none";
  }
  return "?";
}

void TrackerConfig::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError(std::string(name) + " must lie in [0,1]");
  };
  unit(iou_threshold_stage1, "iou_threshold_stage1");
  unit(iou_threshold_stage2, "iou_threshold_stage2");
  unit(det_conf_min, "det_conf_min");
  unit(t_thresh, "t_thresh");
  if (t_terminate < 1) throw DomainError("t_terminate must be >= 1");
  if (!(image.width > 0.0 && image.height > 0.0)) throw DomainError("image size must be positive");
}

namespace {

struct Matcher {
  const TrackerConfig& cfg;
  TrackerState& state;
  const MtpModel* model;

  void spawn(int frame, const Detection& det) {
    Tracklet t;
    t.id = state.next_id++;
    t.append({frame, det.box, BoxSource::detected, det.confidence});
    if (cfg.motion == MotionKind::kf) state.kalman[t.id] = kf_init(det.box, cfg.kalman);
    state.active.push_back(std::move(t));
  }

  void correct(Tracklet& t, const BBox& box) {
    if (cfg.motion != MotionKind::kf) return;
    auto it = state.kalman.find(t.id);
    if (it != state.kalman.end()) it->second = kf_update(it->second, box, cfg.kalman);
  }

  void predict(Tracklet& t) {
    switch (cfg.motion) {
      case MotionKind::none:
        t.predicted_next = t.last_box();
        break;
      case MotionKind::kf: {
        auto [next, box] = kf_predict(state.kalman.at(t.id), cfg.kalman);
        state.kalman[t.id] = next;
        t.predicted_next = box;
        break;
      }
      case MotionKind::mtp:
        t.predicted_next = predict_next_box(*model, t, cfg.image);
        break;
    }
  }
};

std::vector<BBox> predicted_boxes(const std::vector<Tracklet>& tracks) {
  std::vector<BBox> out;
  out.reserve(tracks.size());
  for (const Tracklet& t : tracks) out.push_back(t.predicted_next.value_or(t.last_box()));
  return out;
}

std::vector<BBox> detection_boxes(const std::vector<Detection>& dets) {
  std::vector<BBox> out;
  out.reserve(dets.size());
  for (const Detection& d : dets) out.push_back(d.box);
  return out;
}

bool by_id(const Tracklet& a, const Tracklet& b) { return a.id < b.id; }

}  // namespace

std::vector<TrackRecord> step(TrackerState& state, int frame,
                              const std::vector<Detection>& detections, const MtpModel* model,
                              const TrackerConfig& cfg) {
  if (cfg.motion == MotionKind::mtp && model == nullptr)
    throw DomainError("mtp motion requires a model");
  if (state.initialized && frame <= state.frame)
    throw DomainError("tracker frames must increase (got " + std::to_string(frame) + " after " +
                      std::to_string(state.frame) + ")");
  Matcher m{cfg, state, model};

  std::vector<Detection> dets;
  for (const Detection& d : detections)
    if (d.confidence >= cfg.det_conf_min) dets.push_back(d);

  if (!state.initialized) {
    for (const Detection& d : dets) m.spawn(frame, d);
  } else {
    // Stage 1: active tracklets against all detections.
    std::vector<Tracklet> active = std::move(state.active);
    state.active.clear();
    const Assignment first = hungarian(iou_cost(predicted_boxes(active), detection_boxes(dets)),
                                       1.0 - cfg.iou_threshold_stage1);
    for (auto [r, c] : first.matches) {
      Tracklet& t = active[r];
      t.append({frame, dets[c].box, BoxSource::detected, dets[c].confidence});
      t.state = TrackState::active;
      t.frames_since_update = 0;
      m.correct(t, dets[c].box);
      state.active.push_back(std::move(t));
    }
    for (std::size_t r : first.unmatched_rows) {
      active[r].state = TrackState::lost;
      state.lost.push_back(std::move(active[r]));
    }
    std::sort(state.lost.begin(), state.lost.end(), by_id);

    std::vector<Detection> remaining;
    for (std::size_t c : first.unmatched_cols) remaining.push_back(dets[c]);

    std::vector<Tracklet> lost = std::move(state.lost);
    state.lost.clear();
    std::vector<char> refound(lost.size(), 0);
    std::vector<char> det_used(remaining.size(), 0);
    if (cfg.tpm) {
      // Stage 2: patched predictions of lost tracklets against leftovers.
      const Assignment second =
          hungarian(iou_cost(predicted_boxes(lost), detection_boxes(remaining)),
                    1.0 - cfg.iou_threshold_stage2);
      for (auto [r, c] : second.matches) {
        Tracklet& t = lost[r];
        const BBox patched = t.predicted_next.value_or(t.last_box());
        const BBox box = cfg.refind_uses_detection ? remaining[c].box : patched;
        const BoxSource source =
            cfg.refind_uses_detection ? BoxSource::detected : BoxSource::infilled;
        t.append({frame, box, source, remaining[c].confidence});
        t.state = TrackState::active;
        t.frames_since_update = 0;
        m.correct(t, box);
        refound[r] = 1;
        det_used[c] = 1;
      }
    }
    for (std::size_t r = 0; r < lost.size(); ++r) {
      Tracklet& t = lost[r];
      if (refound[r]) {
        state.active.push_back(std::move(t));
        continue;
      }
      if (cfg.tpm) {
        t.append({frame, t.predicted_next.value_or(t.last_box()), BoxSource::predicted, 0.0});
      }
      ++t.frames_since_update;
      if (t.frames_since_update > cfg.t_terminate) {
        state.kalman.erase(t.id);
        continue;
      }
      state.lost.push_back(std::move(t));
    }

    for (std::size_t c = 0; c < remaining.size(); ++c)
      if (!det_used[c] && remaining[c].confidence > cfg.t_thresh) m.spawn(frame, remaining[c]);
  }

  state.initialized = true;
  state.frame = frame;
  std::sort(state.active.begin(), state.active.end(), by_id);
  std::sort(state.lost.begin(), state.lost.end(), by_id);

  for (Tracklet& t : state.active) m.predict(t);
  for (Tracklet& t : state.lost) m.predict(t);

  std::vector<TrackRecord> out;
  out.reserve(state.active.size());
  for (const Tracklet& t : state.active) {
    const TrackEntry& e = t.entries.back();
    out.push_back({frame, t.id, e.box, e.source, e.confidence});
  }
  return out;
}

std::vector<TrackRecord> track_sequence(const std::vector<Detection>& detections,
                                        const MtpModel* model, const TrackerConfig& cfg) {
  cfg.validate();
  std::vector<TrackRecord> out;
  if (detections.empty()) return out;
  int last_frame = 0;
  for (const Detection& d : detections) {
    if (d.frame < 1) throw DomainError("detection frame indices start at 1");
    last_frame = std::max(last_frame, d.frame);
  }
  std::vector<std::vector<Detection>> by_frame(static_cast<std::size_t>(last_frame) + 1);
  for (const Detection& d : detections) by_frame[static_cast<std::size_t>(d.frame)].push_back(d);

  TrackerState state;
  for (int f = 1; f <= last_frame; ++f) {
    std::vector<TrackRecord> recs = step(state, f, by_frame[static_cast<std::size_t>(f)], model, cfg);
    out.insert(out.end(), recs.begin(), recs.end());
  }
  return out;
}

}  // namespace mambatrack
