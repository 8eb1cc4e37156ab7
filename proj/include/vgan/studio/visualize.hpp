// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <vector>

#include "vgan/dataio/image.hpp"
#include "vgan/renderer/generator.hpp"

namespace vgan {

struct MixGrid {
  std::vector<Tensor> cells;  // row-major, each [3, H, W]
  Image image;
};

/// Row i takes structural_codes[i] as the structural code, column j takes
/// textural_codes[j] for the field and renderer codes. Each code is [1, L].
MixGrid style_mix(const Generator& g, const std::vector<Tensor>& structural_codes,
                  const std::vector<Tensor>& textural_codes, const CameraPose& pose);

struct Pca {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // k × d, orthonormal rows, k ≤ 3
  Eigen::VectorXd variances;
  Eigen::MatrixXd projected;   // n × 3; channels beyond the rank are zero
};

/// Top three principal directions of the rows of `x`.
Pca pca3(const Eigen::MatrixXd& x);

struct DescriptorPca {
  Pca pca;
  Image image;  // ray_res × ray_res, each channel min-max scaled to [0, 255]
};

/// Accumulates descriptors along each ray with the rendering weights, then
/// projects the per-ray vectors onto their top three principal components.
DescriptorPca descriptor_pca(const Generator& g, const CodeBundle& codes, const CameraPose& pose);

}  // namespace vgan
