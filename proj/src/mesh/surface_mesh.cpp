#include "pico/mesh/surface_mesh.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <unordered_map>

namespace pico {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonManifold: return "NonManifold";
    case ErrorKind::DegenerateFace: return "DegenerateFace";
    case ErrorKind::TracingStuck: return "TracingStuck";
    case ErrorKind::Disconnected: return "Disconnected";
    case ErrorKind::DegeneratePatch: return "DegeneratePatch";
    case ErrorKind::DegenerateDirection: return "DegenerateDirection";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::UnknownPart: return "UnknownPart";
    case ErrorKind::OpenMesh: return "OpenMesh";
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::EmptyCorrespondences: return "EmptyCorrespondences";
    case ErrorKind::DegenerateCorrespondences: return "DegenerateCorrespondences";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::EmptyChains: return "EmptyChains";
    case ErrorKind::EmptyStore: return "EmptyStore";
    case ErrorKind::MissingCannedEntry: return "MissingCannedEntry";
    case ErrorKind::MalformedAnswer: return "MalformedAnswer";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SchemaVersionUnsupported: return "SchemaVersionUnsupported";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NotFound: return "NotFound";
    case ErrorKind::Conflict: return "Conflict";
  }
  return "Unknown";
}

// Ericson, Real-Time Collision Detection, 5.1.5, returning barycentrics.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a;
  const Vec3 ac = c - a;
  const Vec3 ap = p - a;
  const double d1 = ab.dot(ap);
  const double d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return {1, 0, 0};

  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp);
  const double d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return {0, 1, 0};

  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
    const double v = d1 / (d1 - d3);
    return {1 - v, v, 0};
  }

  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp);
  const double d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return {0, 0, 1};

  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
    const double w = d2 / (d2 - d6);
    return {1 - w, 0, w};
  }

  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
    const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
    return {0, 1 - w, w};
  }

  const double denom = 1.0 / (va + vb + vc);
  const double v = vb * denom;
  const double w = vc * denom;
  return {1 - v - w, v, w};
}

Vec3 SurfaceMesh::position(const SurfacePoint& p) const {
  const Face& f = faces_[p.face];
  return p.bary[0] * vertices_[f[0]] + p.bary[1] * vertices_[f[1]] + p.bary[2] * vertices_[f[2]];
}

int SurfaceMesh::corner_of(int f, int v) const {
  for (int k = 0; k < 3; ++k)
    if (faces_[f][k] == v) return k;
  return -1;
}

SurfacePoint SurfaceMesh::vertex_point(int v) const {
  require(v >= 0 && v < num_vertices(), ErrorKind::InvalidArgument, "vertex index out of range");
  require(!fans_[v].wedges.empty(), ErrorKind::InvalidArgument, "vertex has no incident face");
  const FanEntry& w = fans_[v].wedges.front();
  SurfacePoint p;
  p.face = w.face;
  p.bary = Vec3::Zero();
  p.bary[w.corner] = 1.0;
  return p;
}

SurfaceMesh build_mesh(std::vector<Vec3> vertices, std::vector<Face> faces) {
  require(!faces.empty(), ErrorKind::InvalidArgument, "mesh needs at least one face");
  SurfaceMesh mesh;
  mesh.vertices_ = std::move(vertices);
  mesh.faces_ = std::move(faces);
  mesh.build_topology();
  mesh.build_fans();
  mesh.build_bvh();
  return mesh;
}

void SurfaceMesh::build_topology() {
  const int nv = num_vertices();
  const int nf = num_faces();
  normals_.resize(nf);
  areas_.resize(nf);

  std::map<std::array<int, 3>, int> seen_faces;
  for (int f = 0; f < nf; ++f) {
    const Face& t = faces_[f];
    for (int k = 0; k < 3; ++k)
      require(t[k] >= 0 && t[k] < nv, ErrorKind::InvalidArgument,
              "face " + std::to_string(f) + " has an out-of-range vertex index");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw Error(ErrorKind::DegenerateFace, "face " + std::to_string(f) + " repeats a vertex");
    const Vec3 n = (vertices_[t[1]] - vertices_[t[0]]).cross(vertices_[t[2]] - vertices_[t[0]]);
    const double area = 0.5 * n.norm();
    if (area < 1e-12)
      throw Error(ErrorKind::DegenerateFace, "face " + std::to_string(f) + " has zero area");
    areas_[f] = area;
    normals_[f] = n.normalized();
    std::array<int, 3> key = t;
    std::sort(key.begin(), key.end());
    if (!seen_faces.emplace(key, f).second)
      throw Error(ErrorKind::NonManifold, "face " + std::to_string(f) + " duplicates face " +
                                              std::to_string(seen_faces[key]));
  }

  auto key_of = [nv](int a, int b) { return static_cast<long long>(a) * nv + b; };
  std::unordered_map<long long, int> directed;  // (a,b) -> 3*f + k
  directed.reserve(3 * nf);
  for (int f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      const int a = faces_[f][(k + 1) % 3];
      const int b = faces_[f][(k + 2) % 3];
      if (!directed.emplace(key_of(a, b), 3 * f + k).second)
        throw Error(ErrorKind::NonManifold, "edge (" + std::to_string(a) + "," +
                                                std::to_string(b) +
                                                ") has more than two faces or inconsistent winding");
    }
  }

  neighbors_.assign(3 * nf, -1);
  face_edges_.assign(3 * nf, -1);
  edge_verts_.clear();
  edge_faces_.clear();
  double edge_sum = 0.0;
  for (int f = 0; f < nf; ++f) {
    for (int k = 0; k < 3; ++k) {
      if (face_edges_[3 * f + k] >= 0) continue;
      const int a = faces_[f][(k + 1) % 3];
      const int b = faces_[f][(k + 2) % 3];
      const int e = static_cast<int>(edge_verts_.size());
      edge_verts_.emplace_back(std::min(a, b), std::max(a, b));
      face_edges_[3 * f + k] = e;
      edge_sum += (vertices_[a] - vertices_[b]).norm();
      auto it = directed.find(key_of(b, a));
      if (it == directed.end()) {
        edge_faces_.emplace_back(f, -1);
        ++boundary_edges_;
      } else {
        const int g = it->second / 3;
        const int kg = it->second % 3;
        neighbors_[3 * f + k] = g;
        neighbors_[3 * g + kg] = f;
        face_edges_[3 * g + kg] = e;
        edge_faces_.emplace_back(f, g);
      }
    }
  }
  mean_edge_length_ = edge_sum / static_cast<double>(edge_verts_.size());

  // Connected components over face adjacency.
  face_component_.assign(nf, -1);
  num_components_ = 0;
  std::vector<int> stack;
  for (int seed = 0; seed < nf; ++seed) {
    if (face_component_[seed] >= 0) continue;
    face_component_[seed] = num_components_;
    stack.push_back(seed);
    while (!stack.empty()) {
      const int f = stack.back();
      stack.pop_back();
      for (int k = 0; k < 3; ++k) {
        const int g = neighbors_[3 * f + k];
        if (g >= 0 && face_component_[g] < 0) {
          face_component_[g] = num_components_;
          stack.push_back(g);
        }
      }
    }
    ++num_components_;
  }

  bounds_ = Aabb{};
  for (const Vec3& v : vertices_) bounds_.grow(v);
}

void SurfaceMesh::build_fans() {
  const int nv = num_vertices();
  std::vector<std::vector<std::pair<int, int>>> incident(nv);
  for (int f = 0; f < num_faces(); ++f)
    for (int k = 0; k < 3; ++k) incident[faces_[f][k]].emplace_back(f, k);

  auto corner_angle = [this](int f, int k) {
    const Vec3 p = corner(f, k);
    const Vec3 a = corner(f, (k + 1) % 3) - p;
    const Vec3 b = corner(f, (k + 2) % 3) - p;
    return std::atan2(a.cross(b).norm(), a.dot(b));
  };

  fans_.assign(nv, {});
  for (int v = 0; v < nv; ++v) {
    const auto& inc = incident[v];
    if (inc.empty()) continue;
    // Start at the wedge whose clockwise neighbor is a boundary, if any.
    int start = 0;
    bool boundary = false;
    for (size_t i = 0; i < inc.size(); ++i) {
      const auto [f, k] = inc[i];
      if (neighbors_[3 * f + (k + 2) % 3] < 0) {
        start = static_cast<int>(i);
        boundary = true;
        break;
      }
    }
    VertexFan& fan = fans_[v];
    fan.closed = !boundary;
    int f = inc[start].first;
    int k = inc[start].second;
    while (true) {
      const double angle = corner_angle(f, k);
      fan.wedges.push_back({f, k, angle});
      fan.total_angle += angle;
      const int next = neighbors_[3 * f + (k + 1) % 3];
      if (next < 0 || next == inc[start].first) break;
      if (fan.wedges.size() > inc.size()) break;
      f = next;
      k = corner_of(f, v);
    }
    if (fan.wedges.size() != inc.size())
      throw Error(ErrorKind::NonManifold,
                  "vertex " + std::to_string(v) + " has a non-manifold (pinched) fan");
  }
}

void SurfaceMesh::build_bvh() {
  const int nf = num_faces();
  face_boxes_.resize(nf);
  std::vector<Vec3> centroids(nf);
  for (int f = 0; f < nf; ++f) {
    Aabb box;
    for (int k = 0; k < 3; ++k) box.grow(corner(f, k));
    face_boxes_[f] = box;
    centroids[f] = (corner(f, 0) + corner(f, 1) + corner(f, 2)) / 3.0;
  }
  bvh_faces_.resize(nf);
  std::iota(bvh_faces_.begin(), bvh_faces_.end(), 0);
  nodes_.clear();
  nodes_.reserve(2 * nf);
  build_bvh_node(0, nf, centroids);
}

int SurfaceMesh::build_bvh_node(int first, int count, std::vector<Vec3>& centroids) {
  const int index = static_cast<int>(nodes_.size());
  nodes_.push_back({});
  Aabb box;
  Aabb cbox;
  for (int i = first; i < first + count; ++i) {
    box.grow(face_boxes_[bvh_faces_[i]]);
    cbox.grow(centroids[bvh_faces_[i]]);
  }
  nodes_[index].box = box;
  if (count <= 4) {
    nodes_[index].first = first;
    nodes_[index].count = count;
    return index;
  }
  int axis = 0;
  (cbox.hi - cbox.lo).maxCoeff(&axis);
  const int mid = first + count / 2;
  std::nth_element(bvh_faces_.begin() + first, bvh_faces_.begin() + mid,
                   bvh_faces_.begin() + first + count, [&](int a, int b) {
                     if (centroids[a][axis] != centroids[b][axis])
                       return centroids[a][axis] < centroids[b][axis];
                     return a < b;
                   });
  const int left = build_bvh_node(first, mid - first, centroids);
  const int right = build_bvh_node(mid, first + count - mid, centroids);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

namespace {

struct Candidate {
  double d2 = std::numeric_limits<double>::infinity();
  int face = -1;
  Vec3 bary;
  Vec3 pos;

  void offer(const SurfaceMesh& mesh, int f, const Vec3& q) {
    const Vec3 bary_f = closest_point_on_triangle(q, mesh.corner(f, 0), mesh.corner(f, 1),
                                                  mesh.corner(f, 2));
    const Vec3 pos_f =
        bary_f[0] * mesh.corner(f, 0) + bary_f[1] * mesh.corner(f, 1) + bary_f[2] * mesh.corner(f, 2);
    const double d2_f = (q - pos_f).squaredNorm();
    if (d2_f < d2 || (d2_f == d2 && f < face)) {
      d2 = d2_f;
      face = f;
      bary = bary_f;
      pos = pos_f;
    }
  }

  ClosestPoint result() const {
    ClosestPoint r;
    r.point.face = face;
    r.point.bary = bary;
    r.position = pos;
    r.distance = std::sqrt(d2);
    return r;
  }
};

}  // namespace

ClosestPoint SurfaceMesh::closest_point(const Vec3& query) const {
  Candidate best;
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = nodes_[stack[--top]];
    if (node.box.squared_distance(query) > best.d2) continue;
    if (node.left < 0) {
      for (int i = node.first; i < node.first + node.count; ++i) best.offer(*this, bvh_faces_[i], query);
      continue;
    }
    const double dl = nodes_[node.left].box.squared_distance(query);
    const double dr = nodes_[node.right].box.squared_distance(query);
    // Push the farther child first so the nearer one is popped next.
    if (dl <= dr) {
      stack[top++] = node.right;
      stack[top++] = node.left;
    } else {
      stack[top++] = node.left;
      stack[top++] = node.right;
    }
  }
  return best.result();
}

ClosestPoint SurfaceMesh::closest_point_exhaustive(const Vec3& query) const {
  Candidate best;
  for (int f = 0; f < num_faces(); ++f) best.offer(*this, f, query);
  return best.result();
}

std::vector<double> SurfaceMesh::ray_hits(const Vec3& origin, const Vec3& dir, int component,
                                          bool* grazing) const {
  std::vector<double> hits;
  const Vec3 inv = dir.cwiseInverse();
  auto box_hit = [&](const Aabb& b) {
    double t0 = 0.0;
    double t1 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 3; ++i) {
      double a = (b.lo[i] - origin[i]) * inv[i];
      double c = (b.hi[i] - origin[i]) * inv[i];
      if (a > c) std::swap(a, c);
      t0 = std::max(t0, a);
      t1 = std::min(t1, c);
      if (t0 > t1) return false;
    }
    return true;
  };
  int stack[128];
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const BvhNode& node = nodes_[stack[--top]];
    if (!box_hit(node.box)) continue;
    if (node.left >= 0) {
      stack[top++] = node.left;
      stack[top++] = node.right;
      continue;
    }
    for (int i = node.first; i < node.first + node.count; ++i) {
      const int f = bvh_faces_[i];
      if (component >= 0 && face_component_[f] != component) continue;
      // Moller-Trumbore.
      const Vec3 a = corner(f, 0);
      const Vec3 e1 = corner(f, 1) - a;
      const Vec3 e2 = corner(f, 2) - a;
      const Vec3 pv = dir.cross(e2);
      const double det = e1.dot(pv);
      if (std::abs(det) < 1e-300) continue;
      const double inv_det = 1.0 / det;
      const Vec3 tv = origin - a;
      const double u = tv.dot(pv) * inv_det;
      if (u < -1e-12 || u > 1.0 + 1e-12) continue;
      const Vec3 qv = tv.cross(e1);
      const double w = dir.dot(qv) * inv_det;
      if (w < -1e-12 || u + w > 1.0 + 1e-12) continue;
      const double s = e2.dot(qv) * inv_det;
      if (s <= 1e-12) continue;
      const double lo = std::min({u, w, 1.0 - u - w});
      if (lo < 1e-9 && grazing != nullptr) *grazing = true;
      hits.push_back(s);
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

SurfaceMesh transformed(const SurfaceMesh& mesh, const Mat3& rotation, const Vec3& translation,
                        double scale) {
  std::vector<Vec3> verts(mesh.vertices().begin(), mesh.vertices().end());
  for (Vec3& v : verts) v = scale * (rotation * v) + translation;
  return build_mesh(std::move(verts), std::vector<Face>(mesh.faces().begin(), mesh.faces().end()));
}

std::vector<ClosestPoint> closest_points(const SurfaceMesh& mesh, std::span<const Vec3> queries) {
  std::vector<ClosestPoint> out(queries.size());
  const long n = static_cast<long>(queries.size());
#pragma omp parallel for schedule(dynamic, 64)
  for (long i = 0; i < n; ++i) out[i] = mesh.closest_point(queries[i]);
  return out;
}

namespace reference {

std::vector<ClosestPoint> closest_points(const SurfaceMesh& mesh, std::span<const Vec3> queries) {
  std::vector<ClosestPoint> out;
  out.reserve(queries.size());
  for (const Vec3& q : queries) out.push_back(mesh.closest_point_exhaustive(q));
  return out;
}

}  // namespace reference

}  // namespace pico
