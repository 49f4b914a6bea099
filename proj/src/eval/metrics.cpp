#include "pico/eval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace pico {

std::vector<Vec3> SimilarityTransform::apply(std::span<const Vec3> points) const {
  std::vector<Vec3> out(points.size());
  for (size_t i = 0; i < points.size(); ++i) out[i] = apply(points[i]);
  return out;
}

PointIndex::PointIndex(std::span<const Vec3> points) : points_(points.begin(), points.end()) {
  order_.resize(points_.size());
  std::iota(order_.begin(), order_.end(), 0);
  if (!points_.empty()) build(0, static_cast<int>(points_.size()));
}

int PointIndex::build(int begin, int end) {
  const int id = static_cast<int>(nodes_.size());
  nodes_.push_back({begin, end});
  if (end - begin <= 8) return id;
  Vec3 lo = points_[order_[begin]], hi = lo;
  for (int i = begin; i < end; ++i) {
    lo = lo.cwiseMin(points_[order_[i]]);
    hi = hi.cwiseMax(points_[order_[i]]);
  }
  int axis;
  (hi - lo).maxCoeff(&axis);
  const int mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end, [&](int a, int b) {
    return points_[a][axis] < points_[b][axis] || (points_[a][axis] == points_[b][axis] && a < b);
  });
  const double split = points_[order_[mid]][axis];
  const int left = build(begin, mid);
  const int right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void PointIndex::search(int id, const Vec3& q, int& best, double& best_d2) const {
  const Node& n = nodes_[id];
  if (n.axis < 0) {
    for (int i = n.begin; i < n.end; ++i) {
      const int p = order_[i];
      const double d2 = (points_[p] - q).squaredNorm();
      if (d2 < best_d2 || (d2 == best_d2 && p < best)) {
        best_d2 = d2;
        best = p;
      }
    }
    return;
  }
  const double diff = q[n.axis] - n.split;
  const int near = diff < 0 ? n.left : n.right;
  const int far = diff < 0 ? n.right : n.left;
  search(near, q, best, best_d2);
  if (diff * diff <= best_d2) search(far, q, best, best_d2);
}

std::pair<int, double> PointIndex::nearest(const Vec3& q) const {
  require(!points_.empty(), ErrorKind::InvalidArgument, "nearest-neighbour query on an empty set");
  int best = -1;
  double d2 = std::numeric_limits<double>::infinity();
  search(0, q, best, d2);
  return {best, std::sqrt(d2)};
}

SimilarityTransform procrustes_align(std::span<const Vec3> source, std::span<const Vec3> target,
                                     bool with_scale) {
  require(source.size() == target.size(), ErrorKind::DegenerateConfiguration,
          "point counts differ: " + std::to_string(source.size()) + " vs " + std::to_string(target.size()));
  require(source.size() >= 3, ErrorKind::DegenerateConfiguration, "need at least 3 points");
  const double n = static_cast<double>(source.size());
  Vec3 mx = Vec3::Zero(), my = Vec3::Zero();
  for (size_t i = 0; i < source.size(); ++i) {
    mx += source[i];
    my += target[i];
  }
  mx /= n;
  my /= n;
  Mat3 cov = Mat3::Zero();
  Mat3 sxx = Mat3::Zero();
  double var = 0.0;
  for (size_t i = 0; i < source.size(); ++i) {
    const Vec3 x = source[i] - mx;
    cov += (target[i] - my) * x.transpose();
    sxx += x * x.transpose();
    var += x.squaredNorm();
  }
  cov /= n;
  var /= n;
  const Vec3 spread = Eigen::SelfAdjointEigenSolver<Mat3>(sxx).eigenvalues();
  require(spread[2] > 1e-300 && spread[1] > 1e-12 * spread[2], ErrorKind::DegenerateConfiguration,
          "source points are collinear or coincident");
  Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Vec3 s = Vec3::Ones();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0) s[2] = -1.0;
  SimilarityTransform t;
  t.rotation = svd.matrixU() * s.asDiagonal() * svd.matrixV().transpose();
  t.scale = with_scale ? svd.singularValues().dot(s) / var : 1.0;
  require(t.scale > 0.0, ErrorKind::DegenerateConfiguration, "non-positive similarity scale");
  t.translation = my - t.scale * (t.rotation * mx);
  return t;
}

namespace {

double mean_nearest(std::span<const Vec3> from, const PointIndex& to) {
  std::vector<double> d(from.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(from.size()); ++i) d[i] = to.nearest(from[i]).second;
  double sum = 0.0;
  for (double x : d) sum += x;
  return sum / static_cast<double>(from.size());
}

double mean_nearest_brute(std::span<const Vec3> from, std::span<const Vec3> to) {
  double sum = 0.0;
  for (const Vec3& p : from) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec3& q : to) best = std::min(best, (p - q).squaredNorm());
    sum += std::sqrt(best);
  }
  return sum / static_cast<double>(from.size());
}

constexpr double kCm = 100.0;

// Uniform double in [0, 1) from the top 53 bits, independent of the standard
// library's distribution implementation.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

void require_same_topology(const SurfaceMesh& a, const SurfaceMesh& b, const char* what) {
  require(a.num_faces() == b.num_faces() && a.num_vertices() == b.num_vertices() &&
              std::equal(a.faces().begin(), a.faces().end(), b.faces().begin()),
          ErrorKind::DimensionMismatch, std::string(what) + " prediction and ground truth differ in topology");
}

}  // namespace

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  require(!a.empty() && !b.empty(), ErrorKind::InvalidArgument, "chamfer needs non-empty point sets");
  const PointIndex ia(a), ib(b);
  return 0.5 * (mean_nearest(a, ib) + mean_nearest(b, ia)) * kCm;
}

std::vector<SurfacePoint> sample_surface(const SurfaceMesh& mesh, int count, std::uint64_t seed) {
  require(mesh.num_faces() > 0 && count > 0, ErrorKind::InvalidArgument, "sampling needs faces and a count");
  std::vector<double> cumulative(mesh.num_faces());
  double total = 0.0;
  for (int f = 0; f < mesh.num_faces(); ++f) cumulative[f] = total += mesh.area(f);
  std::mt19937_64 rng(seed);
  std::vector<SurfacePoint> out(count);
  for (SurfacePoint& s : out) {
    const double r = unit(rng) * total;
    const int f = std::min(static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), r) -
                                            cumulative.begin()),
                           mesh.num_faces() - 1);
    const double r1 = std::sqrt(unit(rng));
    const double r2 = unit(rng);
    s.face = f;
    s.bary = Vec3(1.0 - r1, r1 * (1.0 - r2), r1 * r2);
  }
  return out;
}

PaChamfer pa_cd(const SurfaceMesh& pred_human, const SurfaceMesh& pred_object, const SurfaceMesh& gt_human,
                const SurfaceMesh& gt_object, int samples, std::uint64_t seed,
                const std::vector<bool>* human_mask) {
  require_same_topology(pred_human, gt_human, "human");
  require_same_topology(pred_object, gt_object, "object");
  std::vector<SurfacePoint> hs = sample_surface(gt_human, samples, seed);
  if (human_mask != nullptr) {
    require(static_cast<int>(human_mask->size()) == gt_human.num_vertices(), ErrorKind::DimensionMismatch,
            "human vertex mask size differs from the mesh");
    std::erase_if(hs, [&](const SurfacePoint& s) {
      const Face& f = gt_human.face(s.face);
      return !((*human_mask)[f[0]] && (*human_mask)[f[1]] && (*human_mask)[f[2]]);
    });
    require(!hs.empty(), ErrorKind::InvalidArgument, "human mask removes every sample");
  }
  const std::vector<SurfacePoint> os = sample_surface(gt_object, samples, seed + 1);

  std::vector<Vec3> ph, po, gh, go;
  for (const SurfacePoint& s : hs) {
    ph.push_back(pred_human.position(s));
    gh.push_back(gt_human.position(s));
  }
  for (const SurfacePoint& s : os) {
    po.push_back(pred_object.position(s));
    go.push_back(gt_object.position(s));
  }
  std::vector<Vec3> pred_all = ph, gt_all = gh;
  pred_all.insert(pred_all.end(), po.begin(), po.end());
  gt_all.insert(gt_all.end(), go.begin(), go.end());

  PaChamfer r;
  r.alignment = procrustes_align(pred_all, gt_all);
  const std::vector<Vec3> ah = r.alignment.apply(ph);
  const std::vector<Vec3> ao = r.alignment.apply(po);
  std::vector<Vec3> aall = ah;
  aall.insert(aall.end(), ao.begin(), ao.end());
  r.human = chamfer(ah, gh);
  r.object = chamfer(ao, go);
  r.combined = chamfer(aall, gt_all);
  return r;
}

IcpResult icp_align(std::span<const Vec3> source, std::span<const Vec3> target, int max_iters) {
  require(!source.empty() && !target.empty(), ErrorKind::InvalidArgument, "ICP needs non-empty point sets");
  const PointIndex index(target);
  IcpResult r;
  std::vector<Vec3> matched(source.size());
  for (int it = 0; it < std::max(max_iters, 1); ++it) {
    double sq = 0.0;
    for (size_t i = 0; i < source.size(); ++i) {
      const Vec3 p = r.transform.apply(source[i]);
      const auto [j, d] = index.nearest(p);
      matched[i] = target[j];
      sq += d * d;
    }
    const double rms = std::sqrt(sq / static_cast<double>(source.size()));
    const bool converged = !r.residuals.empty() && r.residuals.back() - rms < 1e-6;
    r.residuals.push_back(rms);
    if (converged || source.size() < 3) break;
    SimilarityTransform next;
    try {
      next = procrustes_align(source, matched, false);
    } catch (const Error&) {
      break;
    }
    r.transform = next;
  }
  return r;
}

ContactSets gt_contact_extract(const SurfaceMesh& human, const SurfaceMesh& object, double threshold) {
  require(threshold > 0.0, ErrorKind::InvalidArgument, "contact threshold must be positive");
  ContactSets s;
  const auto hb = closest_points(object, human.vertices());
  for (int v = 0; v < human.num_vertices(); ++v)
    if (hb[v].distance <= threshold) s.body.push_back(v);
  const auto ob = closest_points(human, object.vertices());
  for (int v = 0; v < object.num_vertices(); ++v)
    if (ob[v].distance <= threshold) s.object.push_back(v);
  return s;
}

F1Score contact_f1(std::span<const int> pred, std::span<const int> gt) {
  std::vector<int> a(pred.begin(), pred.end()), b(gt.begin(), gt.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  if (a.empty() && b.empty()) return {1.0, 1.0, 1.0};
  std::vector<int> both;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(both));
  F1Score s;
  const double tp = static_cast<double>(both.size());
  s.precision = a.empty() ? 0.0 : tp / static_cast<double>(a.size());
  s.recall = b.empty() ? 0.0 : tp / static_cast<double>(b.size());
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

namespace reference {

double chamfer(std::span<const Vec3> a, std::span<const Vec3> b) {
  require(!a.empty() && !b.empty(), ErrorKind::InvalidArgument, "chamfer needs non-empty point sets");
  return 0.5 * (mean_nearest_brute(a, b) + mean_nearest_brute(b, a)) * kCm;
}

ContactSets gt_contact_extract(const SurfaceMesh& human, const SurfaceMesh& object, double threshold) {
  require(threshold > 0.0, ErrorKind::InvalidArgument, "contact threshold must be positive");
  ContactSets s;
  for (int v = 0; v < human.num_vertices(); ++v)
    if (object.closest_point_exhaustive(human.vertex(v)).distance <= threshold) s.body.push_back(v);
  for (int v = 0; v < object.num_vertices(); ++v)
    if (human.closest_point_exhaustive(object.vertex(v)).distance <= threshold) s.object.push_back(v);
  return s;
}

}  // namespace reference

}  // namespace pico
