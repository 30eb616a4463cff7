#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "mambatrack/core_types.hpp"
#include "mambatrack/tracker.hpp"

namespace mambatrack {

// One line of the MOT Challenge text format:
//   frame,id,x,y,w,h,conf,-1,-1,-1
// Raw detections carry id -1.
struct MotRecord {
  int frame = 1;
  int id = -1;
  BBox box;
  double conf = 1.0;

  bool operator==(const MotRecord&) const = default;
};

using FrameGroups = std::map<int, std::vector<MotRecord>>;

// Parses records, skips blank lines and returns them sorted by frame (stable
// within a frame). Throws FormatError naming the line on malformed input.
std::vector<MotRecord> parse_mot(std::istream& in, const std::string& source = "<stream>");
std::vector<MotRecord> read_mot_file(const std::string& path);
FrameGroups group_by_frame(const std::vector<MotRecord>& records);

// Geometry with 2 decimals, confidence with 6.
void format_mot(std::ostream& out, const std::vector<MotRecord>& records);
void write_mot_file(const std::vector<MotRecord>& records, const std::string& path);

std::vector<Detection> to_detections(const std::vector<MotRecord>& records);
std::vector<MotRecord> to_records(const std::vector<TrackRecord>& tracks);
// Groups identities into frame-ordered tracklets (ground truth for training).
std::vector<Tracklet> to_tracklets(const std::vector<MotRecord>& records);

}  // namespace mambatrack
