#include "mambatrack/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace mambatrack {

MotionPattern parse_motion_pattern(const std::string& name) {
  if (name == "linear") return MotionPattern::linear;
  if (name == "sinusoidal") return MotionPattern::sinusoidal;
  if (name == "circular") return MotionPattern::circular;
  if (name == "zigzag") return MotionPattern::zigzag;
  throw DomainError("unknown motion kind '" + name + "'");
}

std::string to_string(MotionPattern pattern) {
  switch (pattern) {
    case MotionPattern::linear: return "linear";
    case MotionPattern::sinusoidal: return "sinusoidal";
    case MotionPattern::circular: return "circular";
    case MotionPattern::zigzag: return "zigzag";
  }
  return "?";
}

void SceneConfig::validate() const {
  if (num_objects < 1 || num_frames < 1) throw DomainError("scene: object and frame counts must be positive");
  if (!(image.width > 0 && image.height > 0)) throw DomainError("scene: image size must be positive");
  for (const OcclusionEvent& o : occlusions) {
    if (o.object < 1 || o.object > num_objects) throw DomainError("scene: occlusion names unknown object");
    if (o.first_frame < 1 || o.last_frame > num_frames || o.first_frame > o.last_frame)
      throw DomainError("scene: occlusion window outside [1, num_frames]");
  }
  if (random_occlusions < 0 || occlusion_min_length < 1 || occlusion_max_length < occlusion_min_length)
    throw DomainError("scene: bad random occlusion settings");
  if (noise_std < 0 || false_positive_rate < 0) throw DomainError("scene: noise and rates must be >= 0");
  if (speed_min < 0 || speed_max < speed_min) throw DomainError("scene: bad speed range");
  if (box_height_min < 1 || box_height_max < box_height_min) throw DomainError("scene: bad box size range");
  if (period_min < 1 || period_max < period_min) throw DomainError("scene: bad period range");
  if (radius_min <= 0 || radius_max < radius_min) throw DomainError("scene: bad radius range");
  if (true_conf_min < 0 || true_conf_min > 1) throw DomainError("scene: true_conf_min outside [0,1]");
  if (border_turn_rate < 0 || border_margin < 0 || border_margin >= 0.5)
    throw DomainError("scene: border steering needs rate >= 0 and margin in [0, 0.5)");
}

namespace {

constexpr double kPi = std::numbers::pi;

double round2(double v) { return std::round(v * 100.0) / 100.0; }
double round6(double v) { return std::round(v * 1e6) / 1e6; }

BBox rounded_box(double cx, double cy, double w, double h) {
  w = std::max(w, 1.0);
  h = std::max(h, 1.0);
  BBox b{round2(cx - w / 2.0), round2(cy - h / 2.0), round2(w), round2(h)};
  b.w = std::max(b.w, 1.0);
  b.h = std::max(b.h, 1.0);
  return b;
}

struct Mover {
  MotionPattern pattern;
  double cx, cy, w, h;
  double speed;
  double heading;
  // sinusoidal
  double amplitude = 0.0, period = 1.0, phase = 0.0;
  // circular
  double ox = 0.0, oy = 0.0, radius = 1.0, omega = 0.0, angle = 0.0;
  // zigzag
  int next_turn = 0;
  // border steering
  double turn_rate = 0.0, margin = 0.0;

  double current_heading(int t) const {
    if (pattern == MotionPattern::sinusoidal)
      return heading + amplitude * std::sin(2.0 * kPi * t / period + phase);
    return heading;
  }

  // Rotates the base heading toward the interior, rate-limited, while the
  // centre is in the border band and the current heading points outwards.
  void steer_inwards(int t, const ImageSize& img) {
    const double ix = (cx < margin ? 1.0 : 0.0) - (cx > img.width - margin ? 1.0 : 0.0);
    const double iy = (cy < margin ? 1.0 : 0.0) - (cy > img.height - margin ? 1.0 : 0.0);
    if (ix == 0.0 && iy == 0.0) return;
    const double th = current_heading(t);
    if (std::cos(th) * ix + std::sin(th) * iy >= 0.0) return;
    const double diff = std::remainder(std::atan2(iy, ix) - th, 2.0 * kPi);
    heading += std::clamp(diff, -turn_rate, turn_rate);
  }

  void advance(int t, const ImageSize& img, std::mt19937_64& rng) {
    if (pattern == MotionPattern::circular) {
      angle += omega;
      cx = ox + radius * std::cos(angle);
      cy = oy + radius * std::sin(angle);
      return;
    }
    if (pattern == MotionPattern::zigzag && t >= next_turn) {
      std::uniform_real_distribution<double> turn(kPi / 3.0, 2.0 * kPi / 3.0);
      std::uniform_int_distribution<int> gap(15, 30);
      std::bernoulli_distribution left(0.5);
      heading += (left(rng) ? 1.0 : -1.0) * turn(rng);
      next_turn = t + gap(rng);
    }
    if (turn_rate > 0.0) steer_inwards(t, img);
    const double th = current_heading(t);
    cx += speed * std::cos(th);
    cy += speed * std::sin(th);
    // Mirror the path at the image borders.
    if (cx < 0.0 || cx > img.width) {
      cx = cx < 0.0 ? -cx : 2.0 * img.width - cx;
      heading = kPi - heading;
      amplitude = -amplitude;
    }
    if (cy < 0.0 || cy > img.height) {
      cy = cy < 0.0 ? -cy : 2.0 * img.height - cy;
      heading = -heading;
      amplitude = -amplitude;
    }
  }
};

}  // namespace

Scene generate_scene(const SceneConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const ImageSize img = cfg.image;

  std::vector<Mover> movers;
  for (int i = 0; i < cfg.num_objects; ++i) {
    Mover m{};
    m.pattern = cfg.motion;
    m.h = between(cfg.box_height_min, cfg.box_height_max);
    m.w = m.h * between(0.4, 0.6);
    m.speed = between(cfg.speed_min, cfg.speed_max);
    m.heading = between(-kPi, kPi);
    m.cx = between(0.1, 0.9) * img.width;
    m.cy = between(0.1, 0.9) * img.height;
    if (cfg.motion == MotionPattern::sinusoidal) {
      m.amplitude = cfg.turn_amplitude * between(0.6, 1.0);
      m.period = between(cfg.period_min, cfg.period_max);
      m.phase = between(0.0, 2.0 * kPi);
      m.turn_rate = cfg.border_turn_rate;
      m.margin = cfg.border_margin * std::min(img.width, img.height);
    } else if (cfg.motion == MotionPattern::circular) {
      const double max_r = std::max(1.0, 0.5 * std::min(img.width, img.height) - 1.0);
      m.radius = std::min(between(cfg.radius_min, cfg.radius_max), max_r);
      m.ox = std::clamp(m.cx, m.radius, img.width - m.radius);
      m.oy = std::clamp(m.cy, m.radius, img.height - m.radius);
      m.angle = between(0.0, 2.0 * kPi);
      m.omega = (unit(rng) < 0.5 ? 1.0 : -1.0) * m.speed / m.radius;
      m.cx = m.ox + m.radius * std::cos(m.angle);
      m.cy = m.oy + m.radius * std::sin(m.angle);
    } else if (cfg.motion == MotionPattern::zigzag) {
      m.next_turn = 1 + std::uniform_int_distribution<int>(15, 30)(rng);
    }
    movers.push_back(m);
  }

  std::vector<OcclusionEvent> occlusions = cfg.occlusions;
  for (int k = 0; k < cfg.random_occlusions; ++k) {
    OcclusionEvent o;
    o.object = std::uniform_int_distribution<int>(1, cfg.num_objects)(rng);
    const int len = std::min(cfg.num_frames,
                             std::uniform_int_distribution<int>(cfg.occlusion_min_length,
                                                                cfg.occlusion_max_length)(rng));
    const int latest = std::max(1, cfg.num_frames - len + 1);
    o.first_frame = std::uniform_int_distribution<int>(std::min(2, latest), latest)(rng);
    o.last_frame = o.first_frame + len - 1;
    occlusions.push_back(o);
  }
  auto occluded = [&](int object, int frame) {
    return std::any_of(occlusions.begin(), occlusions.end(), [&](const OcclusionEvent& o) {
      return o.object == object && frame >= o.first_frame && frame <= o.last_frame;
    });
  };

  std::normal_distribution<double> jitter(0.0, 1.0);
  std::poisson_distribution<int> false_positives(cfg.false_positive_rate);
  Scene scene;
  for (int frame = 1; frame <= cfg.num_frames; ++frame) {
    for (int i = 0; i < cfg.num_objects; ++i) {
      Mover& m = movers[static_cast<std::size_t>(i)];
      if (frame > 1) m.advance(frame, img, rng);
      const int id = i + 1;
      scene.ground_truth.push_back({frame, id, rounded_box(m.cx, m.cy, m.w, m.h), 1.0});
      // Noise is drawn for every object and frame so occlusions do not shift the stream.
      const double ex = jitter(rng) * cfg.noise_std;
      const double ey = jitter(rng) * cfg.noise_std;
      const double ew = jitter(rng) * cfg.noise_std;
      const double eh = jitter(rng) * cfg.noise_std;
      const double conf = between(cfg.true_conf_min, 1.0);
      if (occluded(id, frame)) continue;
      scene.detections.push_back(
          {frame, -1, rounded_box(m.cx + ex, m.cy + ey, m.w + ew, m.h + eh), round6(conf)});
    }
    const int n_fp = cfg.false_positive_rate > 0.0 ? false_positives(rng) : 0;
    for (int k = 0; k < n_fp; ++k) {
      const double h = between(cfg.box_height_min, cfg.box_height_max);
      const double w = h * between(0.4, 0.6);
      const BBox b = rounded_box(between(0.0, img.width), between(0.0, img.height), w, h);
      scene.detections.push_back({frame, -1, b, round6(between(0.1, 0.7))});
    }
  }
  return scene;
}

}  // namespace mambatrack
