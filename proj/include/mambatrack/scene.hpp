#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mambatrack/core_types.hpp"
#include "mambatrack/mot_io.hpp"

namespace mambatrack {

enum class MotionPattern { linear, sinusoidal, circular, zigzag };

MotionPattern parse_motion_pattern(const std::string& name);
std::string to_string(MotionPattern pattern);

// Detections of `object` (1-based gt id) are dropped on frames first..last.
struct OcclusionEvent {
  int object = 1;
  int first_frame = 1;
  int last_frame = 1;
};

struct SceneConfig {
  int num_objects = 8;
  int num_frames = 150;
  ImageSize image;
  MotionPattern motion = MotionPattern::sinusoidal;
  std::vector<OcclusionEvent> occlusions;
  // Additional occlusion windows drawn from the seed.
  int random_occlusions = 0;
  int occlusion_min_length = 5;
  int occlusion_max_length = 15;
  double noise_std = 0.0;             // pixels, per box coordinate
  double false_positive_rate = 0.0;   // Poisson mean per frame
  double speed_min = 3.0;             // pixels per frame
  double speed_max = 8.0;
  double box_height_min = 60.0;
  double box_height_max = 120.0;
  double turn_amplitude = 0.9;        // sinusoidal heading swing, radians
  int period_min = 30;                // sinusoidal heading period, frames
  int period_max = 70;
  // Sinusoidal paths turn away from borders at up to this rate (rad/frame)
  // once the centre is within border_margin * min(width, height) of one and
  // heading outwards; 0 keeps pure mirror reflection.
  double border_turn_rate = 0.25;
  double border_margin = 0.2;
  double radius_min = 60.0;           // circular motion
  double radius_max = 160.0;
  double true_conf_min = 0.7;         // true detections score in [this, 1]
  std::uint64_t seed = 0;

  void validate() const;
};

struct Scene {
  std::vector<MotRecord> ground_truth;
  std::vector<MotRecord> detections;
};

// Deterministic in cfg.seed. Every object is present on every frame; centres
// stay inside the image (linear, sinusoidal and zigzag paths reflect off the
// borders, sinusoidal ones steer away first) and boxes are rounded to 0.01 px.
Scene generate_scene(const SceneConfig& cfg);

}  // namespace mambatrack
