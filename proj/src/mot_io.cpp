#include "mambatrack/mot_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mambatrack {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& field, const std::string& where) {
  const std::string f = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc() || ptr != f.data() + f.size() || !std::isfinite(v))
    throw FormatError(where + ": bad numeric field '" + f + "'");
  return v;
}

int parse_int(const std::string& field, const std::string& where) {
  const double v = parse_number(field, where);
  if (v != std::floor(v)) throw FormatError(where + ": expected an integer, got '" + trim(field) + "'");
  return static_cast<int>(v);
}

}  // namespace

std::vector<MotRecord> parse_mot(std::istream& in, const std::string& source) {
  std::vector<MotRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::string where = source + ":" + std::to_string(line_no);
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != 10)
      throw FormatError(where + ": expected 10 comma-separated fields, got " +
                        std::to_string(fields.size()));
    MotRecord r;
    r.frame = parse_int(fields[0], where);
    r.id = parse_int(fields[1], where);
    r.box = {parse_number(fields[2], where), parse_number(fields[3], where),
             parse_number(fields[4], where), parse_number(fields[5], where)};
    r.conf = parse_number(fields[6], where);
    for (std::size_t k = 7; k < 10; ++k) parse_number(fields[k], where);
    if (r.frame < 1) throw FormatError(where + ": frame must be >= 1");
    if (r.box.w <= 0.0 || r.box.h <= 0.0) throw FormatError(where + ": width and height must be positive");
    out.push_back(r);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const MotRecord& a, const MotRecord& b) { return a.frame < b.frame; });
  return out;
}

std::vector<MotRecord> read_mot_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path);
  return parse_mot(in, path);
}

FrameGroups group_by_frame(const std::vector<MotRecord>& records) {
  FrameGroups g;
  for (const MotRecord& r : records) g[r.frame].push_back(r);
  return g;
}

void format_mot(std::ostream& out, const std::vector<MotRecord>& records) {
  char line[160];
  for (const MotRecord& r : records) {
    std::snprintf(line, sizeof line, "%d,%d,%.2f,%.2f,%.2f,%.2f,%.6f,-1,-1,-1\n", r.frame, r.id,
                  r.box.x, r.box.y, r.box.w, r.box.h, r.conf);
    out << line;
  }
}

void write_mot_file(const std::vector<MotRecord>& records, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  format_mot(out, records);
  if (!out) throw Error("failed writing " + path);
}

std::vector<Detection> to_detections(const std::vector<MotRecord>& records) {
  std::vector<Detection> out;
  out.reserve(records.size());
  for (const MotRecord& r : records) out.push_back({r.frame, r.box, r.conf});
  return out;
}

std::vector<MotRecord> to_records(const std::vector<TrackRecord>& tracks) {
  std::vector<MotRecord> out;
  out.reserve(tracks.size());
  for (const TrackRecord& t : tracks) out.push_back({t.frame, t.id, t.box, t.confidence});
  return out;
}

std::vector<Tracklet> to_tracklets(const std::vector<MotRecord>& records) {
  std::map<int, std::vector<const MotRecord*>> by_id;
  for (const MotRecord& r : records) by_id[r.id].push_back(&r);
  std::vector<Tracklet> out;
  for (auto& [id, recs] : by_id) {
    std::stable_sort(recs.begin(), recs.end(),
                     [](const MotRecord* a, const MotRecord* b) { return a->frame < b->frame; });
    Tracklet t;
    t.id = id;
    for (const MotRecord* r : recs) {
      if (!t.entries.empty() && t.entries.back().frame == r->frame)
        throw FormatError("identity " + std::to_string(id) + " has two boxes in frame " +
                          std::to_string(r->frame));
      t.append({r->frame, r->box, BoxSource::detected, r->conf});
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace mambatrack
