#pragma once

#include <Eigen/Dense>
#include <utility>

#include "mambatrack/core_types.hpp"

namespace mambatrack {

// Noise model of the constant-velocity baseline. All standard deviations
// scale with the current box height.
struct KalmanConfig {
  double std_weight_position = 1.0 / 20.0;
  double std_weight_velocity = 1.0 / 160.0;
  double init_position_factor = 2.0;
  double init_velocity_factor = 10.0;
  double std_weight_measurement = 1.0 / 20.0;
};

// State (cx, cy, w, h, vcx, vcy, vw, vh).
struct KfState {
  Eigen::Matrix<double, 8, 1> mean;
  Eigen::Matrix<double, 8, 8> covariance;
};

KfState kf_init(const BBox& box, const KalmanConfig& cfg = {});

// Unit-time constant-velocity transition; the box is the positional part of
// the new mean (extent floored at 1 px).
std::pair<KfState, BBox> kf_predict(const KfState& state, const KalmanConfig& cfg = {});

KfState kf_update(const KfState& state, const BBox& measurement, const KalmanConfig& cfg = {});

BBox kf_box(const KfState& state);

}  // namespace mambatrack
