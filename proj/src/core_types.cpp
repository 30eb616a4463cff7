#include "mambatrack/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mambatrack {

bool BBox::valid() const {
  return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) && w > 0.0 &&
         h > 0.0;
}

std::size_t TrajFeature::real_count() const {
  return static_cast<std::size_t>(std::count(real.begin(), real.end(), true));
}

TrajFeature TrajFeature::from_deltas(const std::vector<MotionDelta>& recent, std::size_t q) {
  if (recent.size() > q)
    throw DomainError("feature window holds " + std::to_string(q) + " deltas, got " +
                      std::to_string(recent.size()));
  TrajFeature f;
  const std::size_t pad = q - recent.size();
  f.deltas.assign(pad, MotionDelta{});
  f.real.assign(pad, false);
  f.deltas.insert(f.deltas.end(), recent.begin(), recent.end());
  f.real.insert(f.real.end(), recent.size(), true);
  return f;
}

void Tracklet::append(const TrackEntry& entry) {
  if (!entries.empty() && entry.frame <= entries.back().frame)
    throw DomainError("tracklet " + std::to_string(id) + ": frame " + std::to_string(entry.frame) +
                      " does not follow " + std::to_string(entries.back().frame));
  entries.push_back(entry);
}

CenterBox bbox_to_center(const BBox& box) {
  return {box.x + box.w / 2.0, box.y + box.h / 2.0, box.w, box.h};
}

BBox center_to_bbox(const CenterBox& box) {
  return {box.cx - box.w / 2.0, box.cy - box.h / 2.0, box.w, box.h};
}

MotionDelta delta_encode(const BBox& prev, const BBox& next, const ImageSize& img) {
  const CenterBox a = bbox_to_center(prev);
  const CenterBox b = bbox_to_center(next);
  return {(b.cx - a.cx) / img.width, (b.cy - a.cy) / img.height, (b.w - a.w) / img.width,
          (b.h - a.h) / img.height};
}

BBox delta_apply(const BBox& box, const MotionDelta& delta, const ImageSize& img) {
  const CenterBox c = bbox_to_center(box);
  CenterBox out{c.cx + delta.dcx * img.width, c.cy + delta.dcy * img.height,
                c.w + delta.dw * img.width, c.h + delta.dh * img.height};
  out.w = std::max(out.w, 1.0);
  out.h = std::max(out.h, 1.0);
  return center_to_bbox(out);
}

TrajFeature feature_from_boxes(const std::vector<BBox>& boxes, std::size_t q,
                               const ImageSize& img) {
  std::vector<MotionDelta> recent;
  const std::size_t first = boxes.size() > q + 1 ? boxes.size() - (q + 1) : 0;
  for (std::size_t i = first + 1; i < boxes.size(); ++i)
    recent.push_back(delta_encode(boxes[i - 1], boxes[i], img));
  return TrajFeature::from_deltas(recent, q);
}

}  // namespace mambatrack
