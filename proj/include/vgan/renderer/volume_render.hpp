// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <vector>

#include "vgan/diffcore/tensor.hpp"

namespace vgan {

struct RayWeights {
  Tensor weights;        // w_k = T_k (1 − exp(−σ_k δ_k))
  Tensor transmittance;  // T_k = exp(−Σ_{j<k} σ_j δ_j)
};

struct Accumulated {
  Tensor feature;  // [..., F]
  RayWeights rays;
};

/// Quadrature of the volume-rendering integral along the last sample axis.
/// sigma, delta [..., N]; feature [..., N, F]. Differentiable in sigma and
/// feature. Throws on negative sigma or delta.
Accumulated accumulate(const Tensor& sigma, const Tensor& delta, const Tensor& feature);

/// Intervals δ_k = t_{k+1} − t_k, with the last running to `far`.
std::vector<double> sample_intervals(const std::vector<double>& depths, double far);

struct FeatureMap {
  Tensor map;  // [B, F, H, W]
  RayWeights rays;  // [B, H·W, N]
};

/// sigma, delta [B, H·W, N]; feature [B, H·W, N, F] → M [B, F, H, W].
FeatureMap render_feature_map(const Tensor& sigma, const Tensor& delta, const Tensor& feature,
                              int height, int width);

inline constexpr double kBackgroundDepth = -1.0;

/// Per-ray Σ w_k t_k, or `sentinel` where Σ w_k < 0.5. weights and depths are
/// [R, N] flattened row-major.
std::vector<double> render_expected_depth(const std::vector<double>& weights,
                                          const std::vector<double>& depths, std::int64_t n,
                                          double sentinel = kBackgroundDepth);

}  // namespace vgan
