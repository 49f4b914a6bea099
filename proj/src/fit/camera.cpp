#include "pico/fit/camera.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace pico {

namespace {
constexpr double kMinDepth = 1e-6;
}

void validate(const Camera& c) {
  require(c.fx > 0 && c.fy > 0 && std::isfinite(c.fx) && std::isfinite(c.fy), ErrorKind::InvalidArgument,
          "camera focal lengths must be positive");
  require(c.width > 0 && c.height > 0, ErrorKind::InvalidArgument, "camera dimensions must be positive");
}

std::vector<Vec2> project_points(const Camera& c, std::span<const Vec3> points) {
  std::vector<Vec2> out;
  out.reserve(points.size());
  for (const Vec3& p : points) {
    require(p.z() > kMinDepth, ErrorKind::BehindCamera, "point at depth " + std::to_string(p.z()));
    out.emplace_back(c.fx * p.x() / p.z() + c.cx, c.fy * p.y() / p.z() + c.cy);
  }
  return out;
}

SilhouetteMask::SilhouetteMask(int width, int height)
    : width_(width), height_(height), words_per_row_((width + 63) / 64) {
  require(width >= 0 && height >= 0, ErrorKind::InvalidArgument, "negative mask size");
  bits_.assign(static_cast<size_t>(words_per_row_) * height, 0);
}

bool SilhouetteMask::get(int x, int y) const {
  return (bits_[static_cast<size_t>(y) * words_per_row_ + x / 64] >> (x % 64)) & 1u;
}

void SilhouetteMask::set(int x, int y, bool on) {
  std::uint64_t& w = bits_[static_cast<size_t>(y) * words_per_row_ + x / 64];
  const std::uint64_t bit = std::uint64_t{1} << (x % 64);
  w = on ? (w | bit) : (w & ~bit);
}

void SilhouetteMask::fill_span(int y, int x0, int x1) {
  x0 = std::max(x0, 0);
  x1 = std::min(x1, width_);
  if (y < 0 || y >= height_ || x0 >= x1) return;
  std::uint64_t* row = bits_.data() + static_cast<size_t>(y) * words_per_row_;
  int x = x0;
  while (x < x1) {
    const int word = x / 64;
    const int lo = x % 64;
    const int hi = std::min(64, lo + (x1 - x));
    const std::uint64_t m = (hi == 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << hi) - 1)) &
                            ~((std::uint64_t{1} << lo) - 1);
    row[word] |= m;
    x += hi - lo;
  }
}

std::int64_t SilhouetteMask::count() const {
  std::int64_t n = 0;
  for (std::uint64_t w : bits_) n += std::popcount(w);
  return n;
}

std::int64_t intersection_count(const SilhouetteMask& a, const SilhouetteMask& b) {
  std::int64_t n = 0;
  for (size_t i = 0; i < a.bits_.size(); ++i) n += std::popcount(a.bits_[i] & b.bits_[i]);
  return n;
}

std::int64_t union_count(const SilhouetteMask& a, const SilhouetteMask& b) {
  std::int64_t n = 0;
  for (size_t i = 0; i < a.bits_.size(); ++i) n += std::popcount(a.bits_[i] | b.bits_[i]);
  return n;
}

SilhouetteMask rasterize_silhouette(std::span<const Vec3> vertices, std::span<const Face> faces,
                                    const Camera& camera) {
  validate(camera);
  require(!faces.empty(), ErrorKind::InvalidArgument, "cannot rasterize an empty mesh");
  SilhouetteMask mask(camera.width, camera.height);
  std::vector<Vec2> uv(vertices.size());
  std::vector<char> front(vertices.size());
  bool any = false;
  for (size_t v = 0; v < vertices.size(); ++v) {
    const Vec3& p = vertices[v];
    front[v] = p.z() > kMinDepth;
    if (!front[v]) continue;
    any = true;
    uv[v] = Vec2(camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy);
  }
  require(any, ErrorKind::BehindCamera, "every vertex is behind the camera");

  for (const Face& f : faces) {
    if (!front[f[0]] || !front[f[1]] || !front[f[2]]) continue;
    const Vec2 a = uv[f[0]], b = uv[f[1]], c = uv[f[2]];
    const double ymin = std::min({a.y(), b.y(), c.y()});
    const double ymax = std::max({a.y(), b.y(), c.y()});
    // Rows whose pixel center y + 0.5 lies in [ymin, ymax].
    const int r0 = std::max(0, static_cast<int>(std::ceil(ymin - 0.5)));
    const int r1 = std::min(camera.height - 1, static_cast<int>(std::floor(ymax - 0.5)));
    const Vec2* e[3][2] = {{&a, &b}, {&b, &c}, {&c, &a}};
    for (int y = r0; y <= r1; ++y) {
      const double yc = y + 0.5;
      double xl = std::numeric_limits<double>::infinity();
      double xr = -xl;
      for (auto& edge : e) {
        const Vec2& p = *edge[0];
        const Vec2& q = *edge[1];
        if ((yc < p.y()) == (yc < q.y()) && yc != p.y() && yc != q.y()) continue;
        if (p.y() == q.y()) {
          xl = std::min({xl, p.x(), q.x()});
          xr = std::max({xr, p.x(), q.x()});
          continue;
        }
        const double x = p.x() + (yc - p.y()) * (q.x() - p.x()) / (q.y() - p.y());
        xl = std::min(xl, x);
        xr = std::max(xr, x);
      }
      if (!(xl <= xr)) continue;
      // Columns whose pixel center x + 0.5 lies in [xl, xr].
      const int c0 = static_cast<int>(std::ceil(xl - 0.5));
      const int c1 = static_cast<int>(std::floor(xr - 0.5)) + 1;
      mask.fill_span(y, c0, c1);
    }
  }
  return mask;
}

SilhouetteMask rasterize_silhouette(const SurfaceMesh& mesh, const Camera& camera) {
  return rasterize_silhouette(mesh.vertices(), mesh.faces(), camera);
}

double loss_mask(const SilhouetteMask& predicted, const SilhouetteMask& observed) {
  require(predicted.width() == observed.width() && predicted.height() == observed.height(),
          ErrorKind::DimensionMismatch,
          "mask sizes differ: " + std::to_string(predicted.width()) + "x" + std::to_string(predicted.height()) +
              " vs " + std::to_string(observed.width()) + "x" + std::to_string(observed.height()));
  const std::int64_t u = union_count(predicted, observed);
  if (u == 0) return 1.0;
  return 1.0 - static_cast<double>(intersection_count(predicted, observed)) / static_cast<double>(u);
}

}  // namespace pico
