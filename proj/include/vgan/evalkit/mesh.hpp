// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace vgan {

struct Mesh {
  std::vector<Eigen::Vector3d> vertices;
  std::vector<std::array<int, 3>> triangles;

  bool empty() const { return triangles.empty(); }
  /// Appends `other`, offsetting its indices.
  void append(const Mesh& other);
};

/// Throws vgan::Error if an index is out of range or a triangle is degenerate.
void validate_mesh(const Mesh& mesh, double min_area = 1e-12);

void write_obj(const Mesh& mesh, const std::string& path);
Mesh read_obj(const std::string& path);

/// Closed triangle meshes of analytic primitives.
Mesh make_box(const Eigen::Vector3d& center, const Eigen::Vector3d& half_extent);
Mesh make_sphere(const Eigen::Vector3d& center, double radius, int subdivisions);

}  // namespace vgan
