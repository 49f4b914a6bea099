#include "pico/body/sdf.hpp"

#include <algorithm>
#include <cmath>

namespace pico {

namespace {

SdfGrid make_grid(const SurfaceMesh& mesh, double voxel, double padding) {
  require(voxel > 0.0 && padding >= 0.0, ErrorKind::InvalidArgument, "voxel size must be positive");
  require(mesh.num_faces() > 0 && mesh.is_closed(), ErrorKind::OpenMesh, "SDF needs a closed mesh");
  SdfGrid g;
  g.voxel = voxel;
  g.origin = mesh.bounds().lo - Vec3::Constant(padding);
  const Vec3 span = mesh.bounds().hi - mesh.bounds().lo + Vec3::Constant(2 * padding);
  g.nx = static_cast<int>(std::ceil(span.x() / voxel)) + 1;
  g.ny = static_cast<int>(std::ceil(span.y() / voxel)) + 1;
  g.nz = static_cast<int>(std::ceil(span.z() / voxel)) + 1;
  g.values.assign(static_cast<size_t>(g.nx) * g.ny * g.nz, 0.0);
  return g;
}

void finish_grid(SdfGrid& g) {
  double m = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i)
        if (i == 0 || j == 0 || k == 0 || i == g.nx - 1 || j == g.ny - 1 || k == g.nz - 1)
          m = std::max(m, g.at(i, j, k));
  g.max_boundary = m;
}

// Column rays are nudged sideways while any hit grazes an edge.
const Vec3 kJitter[] = {{0.0, 0.0, 0.0}, {0.37, 0.71, 0.0}, {-0.83, 0.29, 0.0}, {0.13, -0.97, 0.0}};

// Hit heights per component along the +z ray through (x, y), sorted.
std::vector<std::vector<double>> column_hits(const SurfaceMesh& mesh, double x, double y, double z0,
                                             double voxel) {
  std::vector<std::vector<double>> hits(mesh.num_components());
  for (const Vec3& jit : kJitter) {
    const Vec3 o = Vec3(x, y, z0) + 1e-6 * voxel * jit;
    bool grazing = false;
    for (int c = 0; c < mesh.num_components(); ++c) {
      hits[c] = mesh.ray_hits(o, Vec3::UnitZ(), c, &grazing);
      for (double& s : hits[c]) s += o.z();
    }
    if (!grazing) break;
  }
  return hits;
}

}  // namespace

bool inside_mesh(const SurfaceMesh& mesh, const Vec3& p) {
  static const Vec3 dirs[] = {Vec3(0.31, 0.27, 0.91).normalized(), Vec3(-0.62, 0.41, 0.67).normalized(),
                              Vec3(0.18, -0.86, 0.48).normalized(), Vec3(-0.55, -0.52, -0.65).normalized()};
  for (int c = 0; c < mesh.num_components(); ++c) {
    size_t count = 0;
    for (const Vec3& d : dirs) {
      bool grazing = false;
      count = mesh.ray_hits(p, d, c, &grazing).size();
      if (!grazing) break;
    }
    if (count % 2 == 1) return true;
  }
  return false;
}

SdfGrid build_sdf(const SurfaceMesh& mesh, double voxel, double padding) {
  SdfGrid g = make_grid(mesh, voxel, padding);
  const double z0 = g.origin.z() - voxel;
  const int columns = g.nx * g.ny;
#pragma omp parallel for schedule(dynamic, 8)
  for (int col = 0; col < columns; ++col) {
    const int i = col % g.nx;
    const int j = col / g.nx;
    const Vec3 base = g.node(i, j, 0);
    const auto hits = column_hits(mesh, base.x(), base.y(), z0, voxel);
    std::vector<size_t> cursor(hits.size(), 0);
    for (int k = 0; k < g.nz; ++k) {
      const Vec3 p = g.node(i, j, k);
      bool inside = false;
      for (size_t c = 0; c < hits.size(); ++c) {
        while (cursor[c] < hits[c].size() && hits[c][cursor[c]] < p.z()) ++cursor[c];
        inside = inside || cursor[c] % 2 == 1;
      }
      const double d = mesh.closest_point(p).distance;
      g.values[i + g.nx * (j + static_cast<size_t>(g.ny) * k)] = inside ? -d : d;
    }
  }
  finish_grid(g);
  return g;
}

namespace reference {

SdfGrid build_sdf(const SurfaceMesh& mesh, double voxel, double padding) {
  SdfGrid g = make_grid(mesh, voxel, padding);
  for (int k = 0; k < g.nz; ++k)
    for (int j = 0; j < g.ny; ++j)
      for (int i = 0; i < g.nx; ++i) {
        const Vec3 p = g.node(i, j, k);
        const double d = mesh.closest_point_exhaustive(p).distance;
        g.values[i + g.nx * (j + static_cast<size_t>(g.ny) * k)] = inside_mesh(mesh, p) ? -d : d;
      }
  finish_grid(g);
  return g;
}

}  // namespace reference

double query_sdf(const SdfGrid& g, const Vec3& p, Vec3* grad) {
  const Vec3 hi = g.node(g.nx - 1, g.ny - 1, g.nz - 1);
  const Vec3 q = p.cwiseMax(g.origin).cwiseMin(hi);
  const double outside = (p - q).norm();
  if (outside > 0.0) {
    if (grad != nullptr) *grad = (p - q) / outside;
    return outside + g.max_boundary;
  }
  Vec3 u = (q - g.origin) / g.voxel;
  int idx[3];
  double f[3];
  const int dims[3] = {g.nx, g.ny, g.nz};
  for (int a = 0; a < 3; ++a) {
    if (std::abs(u[a] - std::round(u[a])) < 1e-9) u[a] = std::round(u[a]);
    idx[a] = std::clamp(static_cast<int>(std::floor(u[a])), 0, std::max(dims[a] - 2, 0));
    f[a] = std::clamp(u[a] - idx[a], 0.0, 1.0);
  }
  double c[2][2][2];
  for (int dk = 0; dk < 2; ++dk)
    for (int dj = 0; dj < 2; ++dj)
      for (int di = 0; di < 2; ++di)
        c[di][dj][dk] = g.at(std::min(idx[0] + di, g.nx - 1), std::min(idx[1] + dj, g.ny - 1),
                             std::min(idx[2] + dk, g.nz - 1));
  auto lerp = [](double a, double b, double t) { return (1.0 - t) * a + t * b; };
  const double c00 = lerp(c[0][0][0], c[1][0][0], f[0]);
  const double c10 = lerp(c[0][1][0], c[1][1][0], f[0]);
  const double c01 = lerp(c[0][0][1], c[1][0][1], f[0]);
  const double c11 = lerp(c[0][1][1], c[1][1][1], f[0]);
  const double c0 = lerp(c00, c10, f[1]);
  const double c1 = lerp(c01, c11, f[1]);
  if (grad != nullptr) {
    const double dx0 = lerp(c[1][0][0] - c[0][0][0], c[1][1][0] - c[0][1][0], f[1]);
    const double dx1 = lerp(c[1][0][1] - c[0][0][1], c[1][1][1] - c[0][1][1], f[1]);
    const double dy0 = c10 - c00;
    const double dy1 = c11 - c01;
    *grad = Vec3(lerp(dx0, dx1, f[2]), lerp(dy0, dy1, f[2]), c1 - c0) / g.voxel;
  }
  return lerp(c0, c1, f[2]);
}

}  // namespace pico
