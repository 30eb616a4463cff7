#include "mambatrack/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

namespace mambatrack {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw FormatError("expected a number, got '" + v + "'");
  return out;
}

long long to_integer(const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw FormatError("expected an integer, got '" + v + "'");
  return out;
}

std::size_t to_size(const std::string& v) {
  const long long n = to_integer(v);
  if (n < 0) throw FormatError("expected a nonnegative integer, got '" + v + "'");
  return static_cast<std::size_t>(n);
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw FormatError("expected a boolean, got '" + v + "'");
}

// "object:first-last" entries separated by commas, e.g. "1:10-17, 3:40-48".
std::vector<OcclusionEvent> to_occlusions(const std::string& v) {
  std::vector<OcclusionEvent> out;
  std::size_t pos = 0;
  while (pos <= v.size()) {
    const std::size_t comma = std::min(v.find(',', pos), v.size());
    const std::string item = trim(v.substr(pos, comma - pos));
    pos = comma + 1;
    if (item.empty()) continue;
    const auto colon = item.find(':');
    const auto dash = item.find('-', colon == std::string::npos ? 0 : colon);
    if (colon == std::string::npos || dash == std::string::npos)
      throw FormatError("occlusion entry '" + item + "' is not object:first-last");
    OcclusionEvent e;
    e.object = static_cast<int>(to_integer(trim(item.substr(0, colon))));
    e.first_frame = static_cast<int>(to_integer(trim(item.substr(colon + 1, dash - colon - 1))));
    e.last_frame = static_cast<int>(to_integer(trim(item.substr(dash + 1))));
    out.push_back(e);
  }
  return out;
}

using Setter = std::function<void(AppConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"model.d_m", [](AppConfig& c, const std::string& v) { c.train.d_m = to_size(v); }},
      {"model.L", [](AppConfig& c, const std::string& v) { c.train.L = to_size(v); }},
      {"model.q", [](AppConfig& c, const std::string& v) { c.train.q = to_size(v); }},
      {"train.batch_size", [](AppConfig& c, const std::string& v) { c.train.batch_size = to_size(v); }},
      {"train.w_warmup", [](AppConfig& c, const std::string& v) { c.train.w_warmup = to_double(v); }},
      {"train.beta1", [](AppConfig& c, const std::string& v) { c.train.beta1 = to_double(v); }},
      {"train.beta2", [](AppConfig& c, const std::string& v) { c.train.beta2 = to_double(v); }},
      {"train.eps", [](AppConfig& c, const std::string& v) { c.train.eps = to_double(v); }},
      {"train.epochs", [](AppConfig& c, const std::string& v) { c.train.epochs = to_size(v); }},
      {"train.seed", [](AppConfig& c, const std::string& v) { c.train.seed = to_size(v); }},
      {"tracker.iou_threshold_stage1",
       [](AppConfig& c, const std::string& v) { c.tracker.iou_threshold_stage1 = to_double(v); }},
      {"tracker.iou_threshold_stage2",
       [](AppConfig& c, const std::string& v) { c.tracker.iou_threshold_stage2 = to_double(v); }},
      {"tracker.det_conf_min", [](AppConfig& c, const std::string& v) { c.tracker.det_conf_min = to_double(v); }},
      {"tracker.t_thresh", [](AppConfig& c, const std::string& v) { c.tracker.t_thresh = to_double(v); }},
      {"tracker.t_terminate",
       [](AppConfig& c, const std::string& v) { c.tracker.t_terminate = static_cast<int>(to_integer(v)); }},
      {"tracker.motion", [](AppConfig& c, const std::string& v) { c.tracker.motion = parse_motion_kind(v); }},
      {"tracker.tpm", [](AppConfig& c, const std::string& v) { c.tracker.tpm = to_bool(v); }},
      {"tracker.refind_uses_detection",
       [](AppConfig& c, const std::string& v) { c.tracker.refind_uses_detection = to_bool(v); }},
      {"scene.num_objects",
       [](AppConfig& c, const std::string& v) { c.scene.num_objects = static_cast<int>(to_integer(v)); }},
      {"scene.num_frames",
       [](AppConfig& c, const std::string& v) { c.scene.num_frames = static_cast<int>(to_integer(v)); }},
      {"scene.motion", [](AppConfig& c, const std::string& v) { c.scene.motion = parse_motion_pattern(v); }},
      {"scene.occlusions", [](AppConfig& c, const std::string& v) { c.scene.occlusions = to_occlusions(v); }},
      {"scene.random_occlusions",
       [](AppConfig& c, const std::string& v) { c.scene.random_occlusions = static_cast<int>(to_integer(v)); }},
      {"scene.occlusion_min_length",
       [](AppConfig& c, const std::string& v) { c.scene.occlusion_min_length = static_cast<int>(to_integer(v)); }},
      {"scene.occlusion_max_length",
       [](AppConfig& c, const std::string& v) { c.scene.occlusion_max_length = static_cast<int>(to_integer(v)); }},
      {"scene.noise_std", [](AppConfig& c, const std::string& v) { c.scene.noise_std = to_double(v); }},
      {"scene.false_positive_rate",
       [](AppConfig& c, const std::string& v) { c.scene.false_positive_rate = to_double(v); }},
      {"scene.speed_min", [](AppConfig& c, const std::string& v) { c.scene.speed_min = to_double(v); }},
      {"scene.speed_max", [](AppConfig& c, const std::string& v) { c.scene.speed_max = to_double(v); }},
      {"scene.box_height_min", [](AppConfig& c, const std::string& v) { c.scene.box_height_min = to_double(v); }},
      {"scene.box_height_max", [](AppConfig& c, const std::string& v) { c.scene.box_height_max = to_double(v); }},
      {"scene.turn_amplitude", [](AppConfig& c, const std::string& v) { c.scene.turn_amplitude = to_double(v); }},
      {"scene.period_min",
       [](AppConfig& c, const std::string& v) { c.scene.period_min = static_cast<int>(to_integer(v)); }},
      {"scene.period_max",
       [](AppConfig& c, const std::string& v) { c.scene.period_max = static_cast<int>(to_integer(v)); }},
      {"scene.border_turn_rate",
       [](AppConfig& c, const std::string& v) { c.scene.border_turn_rate = to_double(v); }},
      {"scene.border_margin", [](AppConfig& c, const std::string& v) { c.scene.border_margin = to_double(v); }},
      {"scene.radius_min", [](AppConfig& c, const std::string& v) { c.scene.radius_min = to_double(v); }},
      {"scene.radius_max", [](AppConfig& c, const std::string& v) { c.scene.radius_max = to_double(v); }},
      {"scene.true_conf_min", [](AppConfig& c, const std::string& v) { c.scene.true_conf_min = to_double(v); }},
      {"scene.seed", [](AppConfig& c, const std::string& v) { c.scene.seed = to_size(v); }},
      {"synth.num_scenes",
       [](AppConfig& c, const std::string& v) { c.num_scenes = static_cast<int>(to_integer(v)); }},
      {"image.width",
       [](AppConfig& c, const std::string& v) { c.scene.image.width = c.tracker.image.width = to_double(v); }},
      {"image.height",
       [](AppConfig& c, const std::string& v) { c.scene.image.height = c.tracker.image.height = to_double(v); }},
  };
  return table;
}

}  // namespace

AppConfig parse_config(std::istream& in, const std::string& source) {
  static const char* const kSections[] = {"model", "train", "tracker", "scene", "synth", "image"};
  AppConfig cfg;
  std::string section;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = source + ":" + std::to_string(line_no);
    const auto hash = line.find('#');
    const std::string text = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw FormatError(where + ": malformed section header");
      section = trim(text.substr(1, text.size() - 2));
      if (std::find(std::begin(kSections), std::end(kSections), section) == std::end(kSections))
        throw FormatError(where + ": unknown section [" + section + "]");
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw FormatError(where + ": expected key = value");
    if (section.empty()) throw FormatError(where + ": key outside any [section]");
    const std::string key = section + "." + trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw FormatError(where + ": unknown key '" + key + "'");
    try {
      it->second(cfg, value);
    } catch (const Error& e) {
      throw FormatError(where + ": " + key + ": " + e.what());
    }
  }
  try {
    cfg.tracker.validate();
    cfg.scene.validate();
    cfg.train.model_config().validate();
  } catch (const DomainError& e) {
    throw FormatError(source + ": " + e.what());
  }
  if (cfg.num_scenes < 1) throw FormatError(source + ": synth.num_scenes must be >= 1");
  if (cfg.train.batch_size < 1) throw FormatError(source + ": train.batch_size must be >= 1");
  return cfg;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open config " + path);
  return parse_config(in, path);
}

}  // namespace mambatrack
