#pragma once

#include "pico/mesh/surface_mesh.hpp"

namespace pico::shapes {

/// Flat n x n grid of quads (2n^2 triangles) in the z = 0 plane, centered at
/// the origin, side length `size`, normals +z.
SurfaceMesh plane_grid(int n, double size);

/// Unit square [0,1]^2 split into two triangles along the (0,0)-(1,1) diagonal.
SurfaceMesh unit_square();

/// Icosahedron refined `levels` times (20 * 4^levels faces), projected to a
/// sphere of `radius` about the origin.
SurfaceMesh icosphere(int levels, double radius);

/// Closed axis-aligned box with `n` x `n` quads per side, outward normals.
SurfaceMesh box(const Vec3& center, const Vec3& extent, int n);

/// Raw vertex/face arrays of `box`, for assembling multi-part meshes.
void append_box(const Vec3& center, const Vec3& extent, int n, std::vector<Vec3>& vertices,
                std::vector<Face>& faces);

}  // namespace pico::shapes
