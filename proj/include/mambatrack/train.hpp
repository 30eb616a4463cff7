#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mambatrack/core_types.hpp"
#include "mambatrack/mtp.hpp"

namespace mambatrack {

struct TrainConfig {
  std::size_t d_m = 512;
  std::size_t L = 3;
  std::size_t q = 10;
  std::size_t batch_size = 64;
  double w_warmup = 4000.0;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-8;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;

  MtpConfig model_config() const { return MtpConfig::with_width(d_m, L, q); }
};

struct WindowSample {
  TrajFeature feature;
  MotionDelta target;
};

// Mean over the four coordinates of the smooth-L1 kernel (transition at 1).
double smooth_l1_loss(const MotionDelta& pred, const MotionDelta& target);

// lr = d_m^-0.5 * min(w^-0.5, w * w_warmup^-1.5); w >= 1.
double lr_at(std::size_t step, const TrainConfig& cfg);

struct AdamState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::size_t step = 0;
};

AdamState make_adam_state(std::span<Tensor* const> params);

// Bias-corrected Adam update applied in place.
void adam_step(std::span<Tensor* const> params, std::span<const Tensor> grads, AdamState& state,
               double lr, double beta1, double beta2, double eps);

// Sliding windows over ground-truth identities: within every frame-contiguous
// run of boxes, one sample per frame from the (q+2)-th frame of the run on.
std::vector<WindowSample> build_windows(const std::vector<Tracklet>& ground_truth, std::size_t q,
                                        const ImageSize& img);

struct StepRecord {
  std::size_t step = 0;
  double lr = 0.0;
  double loss = 0.0;
};

struct TrainResult {
  std::vector<StepRecord> curve;
};

// Seeded minibatch training of `model` in place. Throws DomainError on an
// empty dataset or a dataset whose windows do not match the model.
TrainResult train(std::span<const WindowSample> dataset, const TrainConfig& cfg, MtpModel& model);

// Mean per-sample gradient of the loss over `batch`, in parameter visit order.
std::vector<Tensor> batch_gradient(const MtpModel& model, std::span<const WindowSample> batch,
                                   double* mean_loss = nullptr);

double mean_loss(const MtpModel& model, std::span<const WindowSample> samples);
// Loss of the predictor that always emits the zero offset.
double zero_motion_loss(std::span<const WindowSample> samples);

std::vector<Tensor*> parameter_list(MtpModel& model);

void write_loss_csv(const std::vector<StepRecord>& curve, const std::string& path);

}  // namespace mambatrack
