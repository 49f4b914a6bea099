#include "pico/contact/transfer.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

namespace pico {

namespace {

int find_root(std::vector<int>& parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

// Squared geodesic distance is locally quadratic in arclength on a developable
// neighbourhood, so fit the parabola to squared distances.
double parabola_vertex(double fm, double f0, double fp) {
  const double den = fm - 2.0 * f0 + fp;
  if (den <= 1e-300) return 0.0;
  return std::clamp(0.5 * (fm - fp) / den, -1.0, 1.0);
}

std::optional<SurfacePoint> transfer_one(const SurfaceMesh& target, const ContactAxis& axis,
                                         const ParamRecord& r) {
  const TangentDirection base = point_at_arclength(target, axis.path, axis.arclengths, r.t);
  try {
    return exp_map(target, base, r.d, r.alpha);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::TracingStuck) return std::nullopt;
    throw;
  }
}

TransferResult gather(const ParamPatch& param, const std::vector<std::optional<SurfacePoint>>& mapped) {
  TransferResult out;
  for (size_t i = 0; i < mapped.size(); ++i) {
    if (!mapped[i]) {
      ++out.failed;
      continue;
    }
    out.points.push_back(*mapped[i]);
    out.correspondences.pairs.push_back({param.records[i].vertex, *mapped[i], param.patch_id});
  }
  return out;
}

void check_lengths(const ParamPatch& param, const ContactAxis& axis) {
  require(std::abs(axis.length() - param.axis_length) <= 1e-6, ErrorKind::InvalidArgument,
          "target axis length differs from the parameterized axis");
}

}  // namespace

std::vector<ContactPatch> extract_patches(const SurfaceMesh& mesh, std::span<const int> contact_vertices) {
  const int nv = mesh.num_vertices();
  std::vector<char> member(nv, 0);
  for (int v : contact_vertices) {
    require(v >= 0 && v < nv, ErrorKind::InvalidArgument, "contact vertex out of range");
    member[v] = 1;
  }
  std::vector<int> parent(nv);
  std::iota(parent.begin(), parent.end(), 0);
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const auto [a, b] = mesh.edge_vertices(e);
    if (!member[a] || !member[b]) continue;
    const int ra = find_root(parent, a), rb = find_root(parent, b);
    if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
  }
  std::vector<int> slot(nv, -1);
  std::vector<ContactPatch> patches;
  for (int v = 0; v < nv; ++v) {
    if (!member[v]) continue;
    const int r = find_root(parent, v);
    if (slot[r] < 0) {
      slot[r] = static_cast<int>(patches.size());
      patches.push_back({{}, slot[r]});
    }
    patches[slot[r]].vertices.push_back(v);
  }
  return patches;
}

ContactAxis make_axis(const SurfaceMesh& mesh, GeodesicPath path) {
  // Drop repeated waypoints so the arclength table is strictly increasing.
  const std::vector<Vec3> pos = path.positions(mesh);
  GeodesicPath clean;
  clean.waypoints.push_back(path.waypoints.front());
  Vec3 last = pos.front();
  for (size_t i = 1; i < path.waypoints.size(); ++i) {
    if ((pos[i] - last).norm() <= 1e-15) continue;
    clean.waypoints.push_back(path.waypoints[i]);
    clean.segment_faces.push_back(path.segment_faces[i - 1]);
    last = pos[i];
  }
  require(clean.waypoints.size() >= 2, ErrorKind::DegeneratePatch, "axis has zero length");
  clean.length = path.length;
  clean.initial_direction = path.initial_direction;
  ContactAxis axis;
  axis.arclengths = clean.arclengths(mesh);
  clean.length = axis.arclengths.back();
  axis.start_tangent = clean.initial_direction;
  axis.path = std::move(clean);
  return axis;
}

ContactAxis synthesize_axis(const SurfaceMesh& mesh, const ContactPatch& patch) {
  require(patch.vertices.size() >= 2, ErrorKind::DegeneratePatch, "patch needs at least two vertices");
  Vec3 mean = Vec3::Zero();
  for (int v : patch.vertices) mean += mesh.vertex(v);
  mean /= static_cast<double>(patch.vertices.size());
  Mat3 cov = Mat3::Zero();
  for (int v : patch.vertices) {
    const Vec3 d = mesh.vertex(v) - mean;
    cov += d * d.transpose();
  }
  cov /= static_cast<double>(patch.vertices.size());
  const Eigen::SelfAdjointEigenSolver<Mat3> eig(cov);
  Vec3 axis_dir = eig.eigenvectors().col(2);
  const int smallest = *std::min_element(patch.vertices.begin(), patch.vertices.end());
  if ((mesh.vertex(smallest) - mean).dot(axis_dir) > 0.0) axis_dir = -axis_dir;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (int v : patch.vertices) {
    const double s = (mesh.vertex(v) - mean).dot(axis_dir);
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  require(hi - lo > 1e-9, ErrorKind::DegeneratePatch, "patch vertices coincide");
  const SurfacePoint a = mesh.closest_point(mean + lo * axis_dir).point;
  const SurfacePoint b = mesh.closest_point(mean + hi * axis_dir).point;
  return make_axis(mesh, shortest_geodesic_path(mesh, a, b));
}

ParamPatch parameterize_patch(const SurfaceMesh& mesh, const ContactPatch& patch, const ContactAxis& axis) {
  ParamPatch out;
  out.patch_id = patch.id;
  out.axis_length = axis.length();
  const double length = axis.length();
  const double spacing = 0.5 * mesh.mean_edge_length();
  const int ns = std::max(2, static_cast<int>(std::ceil(length / spacing)) + 1);
  const double step = length / (ns - 1);
  std::vector<TangentDirection> samples(ns);
  std::vector<SurfacePoint> sample_points(ns);
  for (int j = 0; j < ns; ++j) {
    samples[j] = point_at_arclength(mesh, axis.path, axis.arclengths, j * step);
    sample_points[j] = samples[j].base;
  }
  const std::vector<NearestSource> labels = nearest_sources(mesh, sample_points);

  const int n = static_cast<int>(patch.vertices.size());
  out.records.resize(n);
  std::optional<Error> failure;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      const int v = patch.vertices[i];
      const SurfacePoint p = mesh.vertex_point(v);
      require(labels[v].source >= 0, ErrorKind::Disconnected, "vertex not connected to the axis");
      std::vector<double> d2(ns, -1.0);
      auto eval = [&](int j) {
        if (d2[j] < 0.0) {
          const double d = shortest_geodesic_path(mesh, samples[j].base, p).length;
          d2[j] = d * d;
        }
        return d2[j];
      };
      int j = labels[v].source;
      while (true) {
        if (j > 0 && eval(j - 1) < eval(j)) {
          --j;
        } else if (j + 1 < ns && eval(j + 1) < eval(j)) {
          ++j;
        } else {
          break;
        }
      }
      const int c = std::clamp(j, 1, ns - 2);
      double t = (c + parabola_vertex(eval(c - 1), eval(c), eval(c + 1))) * step;
      if (ns == 2) t = eval(0) <= eval(1) ? 0.0 : length;
      t = std::clamp(t, 0.0, length);
      const LogCoordinates lc = log_map(mesh, point_at_arclength(mesh, axis.path, axis.arclengths, t), p);
      out.records[i] = {v, t, lc.distance, lc.angle};
    } catch (const Error& e) {
#pragma omp critical
      if (!failure) failure = e;
    }
  }
  if (failure) throw *failure;
  return out;
}

ContactAxis unpack_axis(const SurfaceMesh& target, const ContactAxis& source, const SurfacePoint& start,
                        const Vec3& click_direction) {
  require(start.face >= 0 && start.face < target.num_faces(), ErrorKind::InvalidArgument,
          "start face out of range");
  const Vec3& n = target.normal(start.face);
  Vec3 d = click_direction - target.position(start);
  d -= d.dot(n) * n;
  require(d.norm() >= 1e-9, ErrorKind::DegenerateDirection, "click direction projects to zero");
  return make_axis(target, trace_straightest_geodesic(target, {start, d.normalized()}, source.length()));
}

TransferResult transfer_patch(const SurfaceMesh& target, const ParamPatch& param, const ContactAxis& axis) {
  check_lengths(param, axis);
  const int n = static_cast<int>(param.records.size());
  std::vector<std::optional<SurfacePoint>> mapped(n);
  std::optional<Error> failure;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      mapped[i] = transfer_one(target, axis, param.records[i]);
    } catch (const Error& e) {
#pragma omp critical
      if (!failure) failure = e;
    }
  }
  if (failure) throw *failure;
  return gather(param, mapped);
}

namespace reference {

TransferResult transfer_patch(const SurfaceMesh& target, const ParamPatch& param, const ContactAxis& axis) {
  check_lengths(param, axis);
  std::vector<std::optional<SurfacePoint>> mapped;
  for (const ParamRecord& r : param.records) mapped.push_back(transfer_one(target, axis, r));
  return gather(param, mapped);
}

}  // namespace reference

std::vector<int> project_contacts(const SurfaceMesh& source, const SurfaceMesh& target,
                                  std::span<const int> contact_vertices) {
  std::vector<int> out;
  out.reserve(contact_vertices.size());
  for (int v : contact_vertices) {
    require(v >= 0 && v < source.num_vertices(), ErrorKind::InvalidArgument, "contact vertex out of range");
    const Vec3& q = source.vertex(v);
    const ClosestPoint cp = target.closest_point(q);
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
      const int w = target.face(cp.point.face)[k];
      const double d = (target.vertex(w) - q).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = w;
      }
    }
    out.push_back(best);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace pico
