// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <memory>
#include <vector>

#include "vgan/diffcore/tensor.hpp"
#include "vgan/nnlayers/params.hpp"

namespace vgan {

class Rng;

struct StructuralConfig {
  std::int64_t template_channels = 256;
  std::int64_t template_res = 4;
  /// One entry per ×2 stage.
  std::vector<std::int64_t> stage_channels = {128, 64, 32};
};

/// Learnable template followed by up×2 → conv3d 3³ → LReLU → AdaIN stages.
class FeatureVolumeNet {
 public:
  FeatureVolumeNet(const StructuralConfig& cfg, Rng& rng, DType dtype = DType::f32);

  /// V [B, C_v, R, R, R] from per-stage AdaIN styles (each [B, C_i]).
  /// `stages`, when given, receives every stage output.
  Tensor synthesize(const std::vector<Tensor>& gamma, const std::vector<Tensor>& beta,
                    std::vector<Tensor>* stages = nullptr) const;

  const StructuralConfig& config() const { return cfg_; }
  std::int64_t output_channels() const { return cfg_.stage_channels.back(); }
  std::int64_t output_res() const;
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

 private:
  StructuralConfig cfg_;
  Tensor template_;
  std::vector<Tensor> conv_w_, conv_b_;
  ParamSet params_;
};

/// Descriptors [B, P, C] at `points` (B·P·3 world coordinates, x y z per point).
Tensor batch_query(const Tensor& volume, std::shared_ptr<const std::vector<double>> points,
                   std::int64_t num_points);

/// Single-point trilinear lookup in V [C, D, H, W]; clamps outside [−1, 1]³.
std::vector<double> query_descriptor(const Tensor& volume, const Eigen::Vector3d& x);

/// World coordinate of voxel centre index i on an axis with n cells.
inline double voxel_center(std::int64_t i, std::int64_t n) {
  return -1.0 + (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
}

}  // namespace vgan
