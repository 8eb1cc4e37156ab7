// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/evalkit/depth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace vgan {

std::optional<double> intersect_triangle(const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                                         const Eigen::Vector3d& v0, const Eigen::Vector3d& v1,
                                         const Eigen::Vector3d& v2, double t_min) {
  int kz = 0;
  if (std::abs(d.y()) > std::abs(d[kz])) kz = 1;
  if (std::abs(d.z()) > std::abs(d[kz])) kz = 2;
  int kx = (kz + 1) % 3, ky = (kx + 1) % 3;
  if (d[kz] < 0.0) std::swap(kx, ky);
  const double sx = d[kx] / d[kz], sy = d[ky] / d[kz], sz = 1.0 / d[kz];

  const Eigen::Vector3d a = v0 - o, b = v1 - o, c = v2 - o;
  const double ax = a[kx] - sx * a[kz], ay = a[ky] - sy * a[kz];
  const double bx = b[kx] - sx * b[kz], by = b[ky] - sy * b[kz];
  const double cx = c[kx] - sx * c[kz], cy = c[ky] - sy * c[kz];
  double u = cx * by - cy * bx;
  double v = ax * cy - ay * cx;
  double w = bx * ay - by * ax;
  if (u == 0.0 || v == 0.0 || w == 0.0) {
    using L = long double;
    u = static_cast<double>(L(cx) * L(by) - L(cy) * L(bx));
    v = static_cast<double>(L(ax) * L(cy) - L(ay) * L(cx));
    w = static_cast<double>(L(bx) * L(ay) - L(by) * L(ax));
  }
  if ((u < 0.0 || v < 0.0 || w < 0.0) && (u > 0.0 || v > 0.0 || w > 0.0)) return std::nullopt;
  const double det = u + v + w;
  if (det == 0.0) return std::nullopt;
  const double t = (u * sz * a[kz] + v * sz * b[kz] + w * sz * c[kz]) / det;
  if (!(t > t_min)) return std::nullopt;
  return t;
}

DepthMap render_mesh_depth(const Mesh& mesh, const CameraPose& pose, const CameraConfig& cfg,
                           int height, int width) {
  const RayGrid rays = generate_rays(pose, cfg, height, width);
  DepthMap out;
  out.width = width;
  out.height = height;
  out.pose = pose;
  out.depth.assign(rays.size(), kNoHit);
  std::vector<double> best(rays.size(), std::numeric_limits<double>::infinity());
  std::vector<std::size_t> best_tri(rays.size(), 0);

  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const auto& tri = mesh.triangles[ti];
    const Eigen::Vector3d& v0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Eigen::Vector3d& v1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Eigen::Vector3d& v2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
    int c0 = 0, c1 = width - 1, r0 = 0, r1 = height - 1;
    double cmin = 1e300, cmax = -1e300, rmin = 1e300, rmax = -1e300;
    bool all_front = true;
    for (const Eigen::Vector3d* v : {&v0, &v1, &v2}) {
      const auto p = project(pose, cfg, height, width, *v);
      if (!p) {
        all_front = false;
        break;
      }
      cmin = std::min(cmin, p->col);
      cmax = std::max(cmax, p->col);
      rmin = std::min(rmin, p->row);
      rmax = std::max(rmax, p->row);
    }
    if (all_front) {
      if (cmax < -1.0 || rmax < -1.0 || cmin > width || rmin > height) continue;
      c0 = std::max(0, static_cast<int>(std::floor(cmin)) - 1);
      c1 = std::min(width - 1, static_cast<int>(std::ceil(cmax)) + 1);
      r0 = std::max(0, static_cast<int>(std::floor(rmin)) - 1);
      r1 = std::min(height - 1, static_cast<int>(std::ceil(rmax)) + 1);
    }
    for (int r = r0; r <= r1; ++r)
      for (int c = c0; c <= c1; ++c) {
        const std::size_t i = static_cast<std::size_t>(r) * width + c;
        const auto t = intersect_triangle(rays.origin, rays.directions[i], v0, v1, v2);
        if (!t || *t < cfg.near || *t > cfg.far) continue;
        if (*t < best[i] || (*t == best[i] && ti < best_tri[i])) {
          best[i] = *t;
          best_tri[i] = ti;
        }
      }
  }
  for (std::size_t i = 0; i < best.size(); ++i)
    if (std::isfinite(best[i])) out.depth[i] = best[i];
  return out;
}

}  // namespace vgan
