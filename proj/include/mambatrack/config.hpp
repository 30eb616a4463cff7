#pragma once

#include <istream>
#include <string>

#include "mambatrack/scene.hpp"
#include "mambatrack/tracker.hpp"
#include "mambatrack/train.hpp"

namespace mambatrack {

struct AppConfig {
  TrainConfig train;
  TrackerConfig tracker;
  SceneConfig scene;
  int num_scenes = 1;
  // Scenes i > 0 use scene.seed + i.
};

// Flat "key = value" lines under [model], [train], [tracker], [scene],
// [synth] and [image] headers. '#' starts a comment. Unknown sections or keys
// and unparsable values raise FormatError naming the line.
AppConfig parse_config(std::istream& in, const std::string& source = "<config>");
AppConfig load_config(const std::string& path);

}  // namespace mambatrack
