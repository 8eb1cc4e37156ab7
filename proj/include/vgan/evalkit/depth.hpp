// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <vector>

#include "vgan/camera/camera.hpp"
#include "vgan/evalkit/mesh.hpp"

namespace vgan {

inline constexpr double kNoHit = -1.0;

struct DepthMap {
  int width = 0, height = 0;
  std::vector<double> depth;  // distance along the pixel ray, or kNoHit
  CameraPose pose;

  double at(int row, int col) const { return depth[static_cast<std::size_t>(row) * width + col]; }
  bool hit(int row, int col) const { return at(row, col) != kNoHit; }
};

/// Watertight ray/triangle test, double sided. Returns the ray parameter of
/// the hit when it exceeds t_min.
std::optional<double> intersect_triangle(const Eigen::Vector3d& origin,
                                         const Eigen::Vector3d& direction,
                                         const Eigen::Vector3d& v0, const Eigen::Vector3d& v1,
                                         const Eigen::Vector3d& v2, double t_min = 1e-9);

/// Nearest hit per pixel centre; hits outside [near, far] count as misses.
DepthMap render_mesh_depth(const Mesh& mesh, const CameraPose& pose, const CameraConfig& cfg,
                           int height, int width);

}  // namespace vgan
