#pragma once

#include "pico/mesh/surface_mesh.hpp"

namespace pico {

/// Signed distances sampled at grid nodes, negative inside the surface.
struct SdfGrid {
  Vec3 origin = Vec3::Zero();
  double voxel = 0.0;
  int nx = 0, ny = 0, nz = 0;
  std::vector<double> values;  // index i + nx * (j + ny * k)
  double max_boundary = 0.0;   // largest value on the grid boundary

  double at(int i, int j, int k) const { return values[i + nx * (j + static_cast<size_t>(ny) * k)]; }
  Vec3 node(int i, int j, int k) const { return origin + voxel * Vec3(i, j, k); }
};

/// Distances from closest-point queries, signs from ray parity per connected
/// component (inside any component counts as inside). Throws OpenMesh.
SdfGrid build_sdf(const SurfaceMesh& mesh, double voxel = 0.02, double padding = 0.1);

/// Trilinear interpolation inside the grid; outside, the distance to the grid
/// box plus `max_boundary`. Writes the spatial gradient when `grad` is given.
double query_sdf(const SdfGrid& grid, const Vec3& p, Vec3* grad = nullptr);

/// Ray-parity inside test; inside any component counts as inside.
bool inside_mesh(const SurfaceMesh& mesh, const Vec3& p);

namespace reference {
/// Per-node evaluation without column sharing.
SdfGrid build_sdf(const SurfaceMesh& mesh, double voxel = 0.02, double padding = 0.1);
}

}  // namespace pico
