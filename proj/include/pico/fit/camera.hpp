#pragma once

#include "pico/mesh/surface_mesh.hpp"

#include <cstdint>

namespace pico {

/// Pinhole intrinsics. Points are given in the camera frame: x right, y down,
/// z forward.
struct Camera {
  double fx = 500.0, fy = 500.0;
  double cx = 320.0, cy = 240.0;
  int width = 640, height = 480;
};

/// Throws InvalidArgument unless focals and dimensions are positive.
void validate(const Camera& camera);

/// u = fx x/z + cx, v = fy y/z + cy. Throws BehindCamera for z <= 1e-6.
std::vector<Vec2> project_points(const Camera& camera, std::span<const Vec3> points);

/// One bit per pixel, row-major.
class SilhouetteMask {
 public:
  SilhouetteMask() = default;
  SilhouetteMask(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool get(int x, int y) const;
  void set(int x, int y, bool on = true);
  /// Sets pixels [x0, x1) of row y.
  void fill_span(int y, int x0, int x1);

  std::int64_t count() const;
  bool operator==(const SilhouetteMask& other) const = default;

  friend std::int64_t intersection_count(const SilhouetteMask& a, const SilhouetteMask& b);
  friend std::int64_t union_count(const SilhouetteMask& a, const SilhouetteMask& b);

 private:
  int width_ = 0, height_ = 0;
  int words_per_row_ = 0;
  std::vector<std::uint64_t> bits_;
};

/// Scanline fill of every projected triangle, pixel-center inside test, no
/// depth test. Triangles with a vertex behind the camera are skipped; throws
/// BehindCamera when every vertex is behind it.
SilhouetteMask rasterize_silhouette(std::span<const Vec3> vertices, std::span<const Face> faces,
                                    const Camera& camera);
SilhouetteMask rasterize_silhouette(const SurfaceMesh& mesh, const Camera& camera);

/// 1 - |A n B| / |A u B|; 1 when both are empty. Throws DimensionMismatch.
double loss_mask(const SilhouetteMask& predicted, const SilhouetteMask& observed);

}  // namespace pico
