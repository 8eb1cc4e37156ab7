// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/camera/camera.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "vgan/diffcore/rng.hpp"
#include "vgan/diffcore/tensor.hpp"

namespace vgan {

namespace {

constexpr double kHalfPi = std::numbers::pi / 2;

double draw_angle(double lo, double hi, SampleDist dist, Rng& rng) {
  if (dist == SampleDist::uniform) return rng.uniform(lo, hi);
  const double mean = 0.5 * (lo + hi);
  const double std = 0.5 * (hi - lo);
  const double v = mean + std * rng.normal();
  return std::clamp(v, mean - 2.0 * std, mean + 2.0 * std);
}

double focal_scale(const CameraConfig& cfg) {
  return std::tan(0.5 * cfg.fov_deg * std::numbers::pi / 180.0);
}

}  // namespace

void CameraConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error("camera config: " + m); };
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) fail("fov must lie in (0, 180) degrees");
  if (!(near < far)) fail("near must be below far");
  if (!(near > 0.0)) fail("near must be positive");
  if (n_steps < 2) fail("n_steps must be at least 2");
  const double two_pi = 2.0 * std::numbers::pi + 1e-12;
  for (double a : {h_lo, h_hi, v_lo, v_hi})
    if (!(a >= -1e-12 && a <= two_pi)) fail("angle ranges must lie within [0, 2π]");
  if (!(h_lo <= h_hi) || !(v_lo <= v_hi)) fail("angle ranges must be ordered");
  if (ray_res < 1) fail("ray_res must be positive");
  if (!(radius > 0.0)) fail("radius must be positive");
}

CameraPose CameraPose::from_yaw_pitch(double yaw, double pitch, double radius) {
  return {yaw + kHalfPi, pitch + kHalfPi, radius};
}

double CameraPose::yaw() const { return theta_h - kHalfPi; }
double CameraPose::pitch() const { return theta_v - kHalfPi; }

Eigen::Vector3d CameraPose::position() const {
  return radius * Eigen::Vector3d(std::sin(theta_v) * std::cos(theta_h), std::cos(theta_v),
                                  std::sin(theta_v) * std::sin(theta_h));
}

Eigen::Matrix3d CameraPose::rotation() const {
  const Eigen::Vector3d forward = (-position()).normalized();
  Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitY());
  if (right.norm() < 1e-9) right = forward.cross(Eigen::Vector3d::UnitZ());
  right.normalize();
  const Eigen::Vector3d up = right.cross(forward);
  Eigen::Matrix3d r;
  r.col(0) = right;
  r.col(1) = up;
  r.col(2) = -forward;
  return r;
}

CameraPose sample_pose(const CameraConfig& cfg, Rng& rng) {
  CameraPose p;
  p.theta_h = draw_angle(cfg.h_lo, cfg.h_hi, cfg.dist, rng);
  p.theta_v = draw_angle(cfg.v_lo, cfg.v_hi, cfg.dist, rng);
  p.radius = cfg.radius;
  return p;
}

RayGrid generate_rays(const CameraPose& pose, const CameraConfig& cfg, int height, int width) {
  if (height < 1 || width < 1) throw Error("generate_rays: image extents must be positive");
  RayGrid g;
  g.height = height;
  g.width = width;
  g.origin = pose.position();
  const Eigen::Matrix3d r = pose.rotation();
  const double t = focal_scale(cfg);
  const double aspect = static_cast<double>(width) / height;
  g.directions.reserve(static_cast<std::size_t>(height) * width);
  for (int i = 0; i < height; ++i) {
    const double yc = (1.0 - 2.0 * (i + 0.5) / height) * t;
    for (int j = 0; j < width; ++j) {
      const double xc = (2.0 * (j + 0.5) / width - 1.0) * t * aspect;
      g.directions.push_back((r * Eigen::Vector3d(xc, yc, -1.0)).normalized());
    }
  }
  return g;
}

Eigen::Vector3d pixel_direction(const CameraPose& pose, const CameraConfig& cfg, int height,
                                int width, double col, double row) {
  const double t = focal_scale(cfg);
  const double aspect = static_cast<double>(width) / height;
  const double yc = (1.0 - 2.0 * (row + 0.5) / height) * t;
  const double xc = (2.0 * (col + 0.5) / width - 1.0) * t * aspect;
  return (pose.rotation() * Eigen::Vector3d(xc, yc, -1.0)).normalized();
}

std::vector<double> sample_depths(const CameraConfig& cfg, bool stratified, Rng* rng) {
  if (cfg.n_steps < 2) throw Error("sample_depths: n_steps must be at least 2");
  if (stratified && rng == nullptr) throw Error("sample_depths: stratified mode needs an rng");
  const double bin = (cfg.far - cfg.near) / cfg.n_steps;
  std::vector<double> t(static_cast<std::size_t>(cfg.n_steps));
  for (int k = 0; k < cfg.n_steps; ++k) {
    const double u = stratified ? rng->uniform() : 0.5;
    t[static_cast<std::size_t>(k)] = cfg.near + (k + u) * bin;
  }
  return t;
}

std::optional<Projection> project(const CameraPose& pose, const CameraConfig& cfg, int height,
                                  int width, const Eigen::Vector3d& point) {
  const Eigen::Vector3d rel = point - pose.position();
  const Eigen::Vector3d c = pose.rotation().transpose() * rel;
  if (!(c.z() < 0.0)) return std::nullopt;
  const double t = focal_scale(cfg);
  const double aspect = static_cast<double>(width) / height;
  const double xn = c.x() / (-c.z() * t * aspect);
  const double yn = c.y() / (-c.z() * t);
  Projection p;
  p.col = (xn + 1.0) * 0.5 * width - 0.5;
  p.row = (1.0 - yn) * 0.5 * height - 0.5;
  p.distance = rel.norm();
  return p;
}

}  // namespace vgan
