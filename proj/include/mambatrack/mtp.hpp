#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mambatrack/autodiff.hpp"
#include "mambatrack/core_types.hpp"
#include "mambatrack/mamba.hpp"

namespace mambatrack {

struct MtpConfig {
  std::size_t q = 10;            // look-back window (number of deltas)
  std::size_t d_m = 512;         // token width
  std::size_t L = 3;             // bi-Mamba blocks
  std::size_t N = 16;            // SSM state size
  std::size_t E = 2;             // expansion factor
  std::size_t K = 4;             // causal conv width
  std::size_t d_mlp = 1024;      // hidden width of the per-step MLP
  std::size_t head_hidden = 512;

  // Defaults with d_mlp = 2 d_m and head_hidden = d_m.
  static MtpConfig with_width(std::size_t d_m, std::size_t L, std::size_t q = 10);

  MambaDims mamba_dims() const { return {d_m, E, N, K}; }
  void validate() const;
  bool operator==(const MtpConfig&) const = default;
};

struct OffsetPrediction {
  MotionDelta offset;
};

// Embedding 4 -> d_m, L bi-Mamba blocks, temporal mean, two-layer head.
struct MtpModel {
  MtpConfig config;
  Linear embed;
  std::vector<BiMambaParams> blocks;
  Linear head_fc1;
  Linear head_fc2;

  template <typename F>
  void visit(F&& f) {
    visit_impl(*this, f);
  }
  template <typename F>
  void visit(F&& f) const {
    visit_impl(*this, f);
  }
  std::size_t parameter_count() const;

 private:
  template <typename Self, typename F>
  static void visit_impl(Self& self, F& f) {
    visit_linear(self.embed, "embed", f);
    for (std::size_t l = 0; l < self.blocks.size(); ++l)
      visit_bi_mamba_block(self.blocks[l], "blocks." + std::to_string(l), f);
    visit_linear(self.head_fc1, "head.fc1", f);
    visit_linear(self.head_fc2, "head.fc2", f);
  }
};

MtpModel init_mtp_model(const MtpConfig& config, std::uint64_t seed);

// q x 4 matrix of the feature's deltas, oldest first.
Tensor feature_matrix(const TrajFeature& feature);

Tensor tokenize(const MtpModel& model, const TrajFeature& feature);
OffsetPrediction forward(const MtpModel& model, const TrajFeature& feature);
// Tape variant of forward(); yields a 1 x 4 node.
ad::Var forward(ad::Tape& tape, const MtpModel& model, const TrajFeature& feature);

// Predicts the box following `history` (oldest first, all provenances alike).
// A single box is returned unchanged. Throws DomainError on empty history.
BBox predict_next_box(const MtpModel& model, const std::vector<BBox>& history,
                      const ImageSize& img);
BBox predict_next_box(const MtpModel& model, const Tracklet& tracklet, const ImageSize& img);

// Autoregressive k-step extension: each prediction is appended to a working
// copy of the trajectory before predicting the next one.
std::vector<BBox> rollout(const MtpModel& model, const Tracklet& tracklet, const ImageSize& img,
                          std::size_t steps);

}  // namespace mambatrack
