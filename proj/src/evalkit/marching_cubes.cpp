// Copyright Contributors to the vgan project
// SPDX-License-Identifier: Apache-2.0

#include "vgan/evalkit/marching_cubes.hpp"

#include <Eigen/Geometry>
#include <unordered_map>

#include "vgan/renderer/generator.hpp"

namespace vgan {

namespace {

#include "mc_tables.inc"

// Corner offsets (x, y, z) in table order and the corner pair of each edge.
constexpr int kCorner[8][3] = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0},
                               {0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {0, 1, 1}};
constexpr int kEdge[12][2] = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {4, 5}, {5, 6},
                              {6, 7}, {7, 4}, {0, 4}, {1, 5}, {2, 6}, {3, 7}};

}  // namespace

std::vector<double> ScalarGrid::node_points() const {
  std::vector<double> pts;
  pts.reserve(static_cast<std::size_t>(n) * n * n * 3);
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) {
        pts.push_back(coord(x));
        pts.push_back(coord(y));
        pts.push_back(coord(z));
      }
  return pts;
}

ScalarGrid sample_grid(int n, const std::function<double(double, double, double)>& f, double lo,
                       double hi) {
  if (n < 2) throw Error("sample_grid: need at least 2 nodes per axis");
  ScalarGrid g{n, lo, hi, {}};
  g.values.reserve(static_cast<std::size_t>(n) * n * n);
  for (int z = 0; z < n; ++z)
    for (int y = 0; y < n; ++y)
      for (int x = 0; x < n; ++x) g.values.push_back(f(g.coord(x), g.coord(y), g.coord(z)));
  return g;
}

Mesh marching_cubes(const ScalarGrid& grid, double iso) {
  const int n = grid.n;
  if (n < 2 || grid.values.size() != static_cast<std::size_t>(n) * n * n)
    throw Error("marching_cubes: grid values do not match n³");
  auto node = [n](int x, int y, int z) { return (static_cast<std::int64_t>(z) * n + y) * n + x; };
  Mesh mesh;
  std::unordered_map<std::int64_t, int> edge_vertex;

  auto vertex_on = [&](const int (&a)[3], const int (&b)[3]) {
    const std::int64_t na = node(a[0], a[1], a[2]), nb = node(b[0], b[1], b[2]);
    const std::int64_t lo = std::min(na, nb);
    const int axis = a[0] != b[0] ? 0 : (a[1] != b[1] ? 1 : 2);
    const std::int64_t key = lo * 3 + axis;
    auto it = edge_vertex.find(key);
    if (it != edge_vertex.end()) return it->second;
    const double va = grid.values[static_cast<std::size_t>(na)];
    const double vb = grid.values[static_cast<std::size_t>(nb)];
    const double den = vb - va;
    const double t = std::abs(den) < 1e-12 ? 0.5 : (iso - va) / den;
    Eigen::Vector3d pa(grid.coord(a[0]), grid.coord(a[1]), grid.coord(a[2]));
    Eigen::Vector3d pb(grid.coord(b[0]), grid.coord(b[1]), grid.coord(b[2]));
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back(pa + t * (pb - pa));
    edge_vertex.emplace(key, id);
    return id;
  };

  for (int z = 0; z + 1 < n; ++z)
    for (int y = 0; y + 1 < n; ++y)
      for (int x = 0; x + 1 < n; ++x) {
        int corner[8][3];
        int index = 0;
        for (int c = 0; c < 8; ++c) {
          corner[c][0] = x + kCorner[c][0];
          corner[c][1] = y + kCorner[c][1];
          corner[c][2] = z + kCorner[c][2];
          if (grid.values[static_cast<std::size_t>(node(corner[c][0], corner[c][1], corner[c][2]))] < iso)
            index |= 1 << c;
        }
        if (kEdgeTable[index] == 0) continue;
        int ev[12];
        for (int e = 0; e < 12; ++e)
          if (kEdgeTable[index] & (1 << e)) ev[e] = vertex_on(corner[kEdge[e][0]], corner[kEdge[e][1]]);
        for (int k = 0; kTriTable[index][k] != -1; k += 3) {
          const std::array<int, 3> tri{ev[kTriTable[index][k]], ev[kTriTable[index][k + 1]],
                                       ev[kTriTable[index][k + 2]]};
          const Eigen::Vector3d& p0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
          const Eigen::Vector3d& p1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
          const Eigen::Vector3d& p2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
          if (0.5 * (p1 - p0).cross(p2 - p0).norm() < 1e-12) continue;
          mesh.triangles.push_back(tri);
        }
      }
  return mesh;
}

Mesh extract_mesh(const Generator& g, const CodeBundle& codes, int grid_res, double threshold) {
  if (grid_res < 8) throw Error("extract_mesh: grid_res must be at least 8");
  ScalarGrid grid{grid_res, -1.0, 1.0, {}};
  grid.values = g.density(codes, grid.node_points());
  return marching_cubes(grid, threshold);
}

}  // namespace vgan
