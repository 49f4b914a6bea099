#include "pico/mesh/shapes.hpp"

#include <map>

namespace pico::shapes {

SurfaceMesh plane_grid(int n, double size) {
  require(n >= 1 && size > 0.0, ErrorKind::InvalidArgument, "plane_grid needs n >= 1, size > 0");
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  const double h = size / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) verts.emplace_back(-0.5 * size + i * h, -0.5 * size + j * h, 0.0);
  auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      // Alternate the diagonal so no direction is preferred.
      if ((i + j) % 2 == 0) {
        faces.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
        faces.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
      } else {
        faces.push_back({id(i, j), id(i + 1, j), id(i, j + 1)});
        faces.push_back({id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
      }
    }
  }
  return build_mesh(std::move(verts), std::move(faces));
}

SurfaceMesh unit_square() {
  return build_mesh({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, {{0, 1, 2}, {0, 2, 3}});
}

SurfaceMesh icosphere(int levels, double radius) {
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {{-1, t, 0}, {1, t, 0},  {-1, -t, 0}, {1, -t, 0},
                             {0, -1, t}, {0, 1, t},  {0, -1, -t}, {0, 1, -t},
                             {t, 0, -1}, {t, 0, 1},  {-t, 0, -1}, {-t, 0, 1}};
  for (Vec3& v : verts) v.normalize();
  std::vector<Face> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                             {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                             {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                             {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int level = 0; level < levels; ++level) {
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
      const auto key = std::minmax(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      verts.push_back((verts[a] + verts[b]).normalized());
      const int id = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, id);
      return id;
    };
    std::vector<Face> next;
    next.reserve(faces.size() * 4);
    for (const Face& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      next.push_back({f[0], ab, ca});
      next.push_back({f[1], bc, ab});
      next.push_back({f[2], ca, bc});
      next.push_back({ab, bc, ca});
    }
    faces = std::move(next);
  }
  for (Vec3& v : verts) v *= radius;
  return build_mesh(std::move(verts), std::move(faces));
}

void append_box(const Vec3& center, const Vec3& extent, int n, std::vector<Vec3>& vertices,
                std::vector<Face>& faces) {
  require(n >= 1, ErrorKind::InvalidArgument, "box needs n >= 1");
  std::map<std::array<int, 3>, int> lattice;
  auto vid = [&](std::array<int, 3> ijk) {
    auto it = lattice.find(ijk);
    if (it != lattice.end()) return it->second;
    Vec3 p;
    for (int a = 0; a < 3; ++a) p[a] = center[a] + extent[a] * (static_cast<double>(ijk[a]) / n - 0.5);
    vertices.push_back(p);
    const int id = static_cast<int>(vertices.size()) - 1;
    lattice.emplace(ijk, id);
    return id;
  };
  for (int axis = 0; axis < 3; ++axis) {
    const int u = (axis + 1) % 3;
    const int v = (axis + 2) % 3;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          auto at = [&](int di, int dj) {
            std::array<int, 3> ijk{};
            ijk[axis] = side * n;
            ijk[u] = i + di;
            ijk[v] = j + dj;
            return vid(ijk);
          };
          const int a = at(0, 0), b = at(1, 0), c = at(1, 1), d = at(0, 1);
          // e_u x e_v = e_axis, so (a, b, c) faces outward on the max side.
          if (side == 1) {
            faces.push_back({a, b, c});
            faces.push_back({a, c, d});
          } else {
            faces.push_back({a, c, b});
            faces.push_back({a, d, c});
          }
        }
      }
    }
  }
}

SurfaceMesh box(const Vec3& center, const Vec3& extent, int n) {
  std::vector<Vec3> verts;
  std::vector<Face> faces;
  append_box(center, extent, n, verts, faces);
  return build_mesh(std::move(verts), std::move(faces));
}

}  // namespace pico::shapes
