// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <vector>

#include "vgan/evalkit/mesh.hpp"

namespace vgan {

class Generator;
struct CodeBundle;

inline constexpr double kDefaultIsoThreshold = 10.0;

/// Lattice of n³ nodes spanning [lo, hi]³; values are indexed (z * n + y) * n + x.
struct ScalarGrid {
  int n = 0;
  double lo = -1.0, hi = 1.0;
  std::vector<double> values;

  double coord(int i) const { return lo + (hi - lo) * i / (n - 1); }
  /// World positions of every node, x fastest, as packed xyz triples.
  std::vector<double> node_points() const;
};

ScalarGrid sample_grid(int n, const std::function<double(double, double, double)>& f,
                       double lo = -1.0, double hi = 1.0);

/// Isosurface of `grid` at `iso`, the inside being values above `iso`.
/// Vertices are shared between cells along each lattice edge; triangles with
/// area below 1e−12 are dropped.
Mesh marching_cubes(const ScalarGrid& grid, double iso);

/// σ of the generator on a grid_res³ lattice over [−1, 1]³, then marching cubes.
Mesh extract_mesh(const Generator& g, const CodeBundle& codes, int grid_res,
                  double threshold = kDefaultIsoThreshold);

}  // namespace vgan
