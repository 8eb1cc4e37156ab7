// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace vgan {

class Rng;

enum class SampleDist { gaussian, uniform };

struct CameraConfig {
  double fov_deg = 12.0;  // vertical
  double near = 0.88;
  double far = 1.12;
  int n_steps = 12;
  double h_lo = 1.2707963267948966, h_hi = 1.8707963267948966;
  double v_lo = 1.4207963267948966, v_hi = 1.7207963267948966;
  SampleDist dist = SampleDist::gaussian;
  int ray_res = 64;
  double radius = 1.0;

  /// Throws vgan::Error describing the first violated constraint.
  void validate() const;
};

/// Orbit pose: horizontal angle θh, vertical (polar, from +y) angle θv, radius.
/// The camera sits at r·(sinθv cosθh, cosθv, sinθv sinθh) and looks at the
/// origin with +y as world up; θh = θv = π/2 places it on +z.
struct CameraPose {
  double theta_h = 1.5707963267948966;
  double theta_v = 1.5707963267948966;
  double radius = 1.0;

  static CameraPose from_yaw_pitch(double yaw, double pitch, double radius = 1.0);
  double yaw() const;
  double pitch() const;

  Eigen::Vector3d position() const;
  /// Camera-to-world rotation with columns (right, up, back); the camera looks
  /// along −column 2.
  Eigen::Matrix3d rotation() const;
};

CameraPose sample_pose(const CameraConfig& cfg, Rng& rng);

/// Pinhole rays through pixel centres, row-major from the top-left pixel.
struct RayGrid {
  int height = 0, width = 0;
  Eigen::Vector3d origin = Eigen::Vector3d::Zero();
  std::vector<Eigen::Vector3d> directions;

  std::size_t size() const { return directions.size(); }
};

RayGrid generate_rays(const CameraPose& pose, const CameraConfig& cfg, int height, int width);
/// Unit ray direction through continuous pixel coordinates (centres at integers).
Eigen::Vector3d pixel_direction(const CameraPose& pose, const CameraConfig& cfg, int height,
                                int width, double col, double row);

/// n_steps ascending depths in [near, far]: one uniform draw per equal-width
/// bin when stratified, bin midpoints otherwise (rng may then be null).
std::vector<double> sample_depths(const CameraConfig& cfg, bool stratified, Rng* rng);

/// Continuous pixel coordinates (column, row) of a world point, pixel centres
/// at integers, plus its distance from the camera. Empty behind the camera.
struct Projection {
  double col, row, distance;
};
std::optional<Projection> project(const CameraPose& pose, const CameraConfig& cfg, int height,
                                  int width, const Eigen::Vector3d& point);

}  // namespace vgan
