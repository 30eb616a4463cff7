#include "mambatrack/kalman.hpp"

#include <algorithm>

namespace mambatrack {

namespace {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Mat4 = Eigen::Matrix<double, 4, 4>;
using Mat48 = Eigen::Matrix<double, 4, 8>;
using Vec4 = Eigen::Matrix<double, 4, 1>;

Mat8 transition() {
  Mat8 F = Mat8::Identity();
  for (int i = 0; i < 4; ++i) F(i, i + 4) = 1.0;
  return F;
}

Mat48 observation() {
  Mat48 H = Mat48::Zero();
  for (int i = 0; i < 4; ++i) H(i, i) = 1.0;
  return H;
}

void symmetrize(Mat8& P) { P = 0.5 * (P + P.transpose()).eval(); }

}  // namespace

BBox kf_box(const KfState& state) {
  const CenterBox c{state.mean(0), state.mean(1), std::max(state.mean(2), 1.0),
                    std::max(state.mean(3), 1.0)};
  return center_to_bbox(c);
}

KfState kf_init(const BBox& box, const KalmanConfig& cfg) {
  const CenterBox c = bbox_to_center(box);
  KfState s;
  s.mean << c.cx, c.cy, c.w, c.h, 0.0, 0.0, 0.0, 0.0;
  const double pos = cfg.init_position_factor * cfg.std_weight_position * c.h;
  const double vel = cfg.init_velocity_factor * cfg.std_weight_velocity * c.h;
  s.covariance = Mat8::Zero();
  for (int i = 0; i < 4; ++i) {
    s.covariance(i, i) = pos * pos;
    s.covariance(i + 4, i + 4) = vel * vel;
  }
  return s;
}

std::pair<KfState, BBox> kf_predict(const KfState& state, const KalmanConfig& cfg) {
  const Mat8 F = transition();
  const double h = state.mean(3);
  const double pos = cfg.std_weight_position * h;
  const double vel = cfg.std_weight_velocity * h;
  Mat8 Q = Mat8::Zero();
  for (int i = 0; i < 4; ++i) {
    Q(i, i) = pos * pos;
    Q(i + 4, i + 4) = vel * vel;
  }
  KfState next;
  next.mean = F * state.mean;
  next.covariance = F * state.covariance * F.transpose() + Q;
  symmetrize(next.covariance);
  return {next, kf_box(next)};
}

KfState kf_update(const KfState& state, const BBox& measurement, const KalmanConfig& cfg) {
  const Mat48 H = observation();
  const CenterBox z = bbox_to_center(measurement);
  const double r = cfg.std_weight_measurement * state.mean(3);
  const Mat4 R = Mat4::Identity() * (r * r);

  const Mat4 S = H * state.covariance * H.transpose() + R;
  Eigen::LLT<Mat4> llt(S);
  // K = P H^T S^-1, solved as S K^T = H P.
  const Eigen::Matrix<double, 8, 4> K = llt.solve(H * state.covariance).transpose();
  const Vec4 innovation = Vec4(z.cx, z.cy, z.w, z.h) - H * state.mean;

  KfState next;
  next.mean = state.mean + K * innovation;
  next.covariance = state.covariance - K * S * K.transpose();
  symmetrize(next.covariance);
  return next;
}

}  // namespace mambatrack
