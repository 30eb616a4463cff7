#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "mambatrack/errors.hpp"

namespace mambatrack {

// Axis-aligned box, top-left corner plus extent, in pixels.
struct BBox {
  double x = 0.0;
  double y = 0.0;
  double w = 1.0;
  double h = 1.0;

  bool valid() const;
  bool operator==(const BBox&) const = default;
};

struct CenterBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;

  bool operator==(const CenterBox&) const = default;
};

struct ImageSize {
  double width = 1280.0;
  double height = 720.0;
};

struct Detection {
  int frame = 0;
  BBox box;
  double confidence = 1.0;
};

// Inter-frame box offset normalized by the image extent:
// horizontal terms by width, vertical terms by height.
struct MotionDelta {
  double dcx = 0.0;
  double dcy = 0.0;
  double dw = 0.0;
  double dh = 0.0;

  std::array<double, 4> as_array() const { return {dcx, dcy, dw, dh}; }
  static MotionDelta from_array(const std::array<double, 4>& a) { return {a[0], a[1], a[2], a[3]}; }
  bool operator==(const MotionDelta&) const = default;
};

// Fixed-length look-back window of deltas. Padded slots are zero deltas and
// always precede the real ones.
struct TrajFeature {
  std::vector<MotionDelta> deltas;
  std::vector<bool> real;

  std::size_t length() const { return deltas.size(); }
  std::size_t real_count() const;
  // Left-pads `recent` (oldest first) with zeros up to `q` slots. Throws if
  // more than q deltas are given.
  static TrajFeature from_deltas(const std::vector<MotionDelta>& recent, std::size_t q);
};

enum class BoxSource : std::uint8_t { detected, infilled, predicted };

struct TrackEntry {
  int frame = 0;
  BBox box;
  BoxSource source = BoxSource::detected;
  double confidence = 1.0;
};

enum class TrackState : std::uint8_t { active, lost };

struct Tracklet {
  int id = 0;
  std::vector<TrackEntry> entries;
  TrackState state = TrackState::active;
  int frames_since_update = 0;
  std::optional<BBox> predicted_next;

  const BBox& last_box() const { return entries.back().box; }
  int last_frame() const { return entries.back().frame; }
  // Appends an entry; frames must be strictly increasing.
  void append(const TrackEntry& entry);
};

CenterBox bbox_to_center(const BBox& box);
BBox center_to_bbox(const CenterBox& box);

MotionDelta delta_encode(const BBox& prev, const BBox& next, const ImageSize& img);
// Inverse of delta_encode; the resulting width and height are clamped to >= 1 px.
BBox delta_apply(const BBox& box, const MotionDelta& delta, const ImageSize& img);

// Builds the look-back feature from the last <= q+1 boxes of `boxes`.
TrajFeature feature_from_boxes(const std::vector<BBox>& boxes, std::size_t q,
                               const ImageSize& img);

}  // namespace mambatrack
