#include "pico/mesh/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace pico {

namespace {

constexpr double kVertexTol = 1e-9;

double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
double orient2(const Vec2& a, const Vec2& b, const Vec2& c) { return cross2(b - a, c - a); }

Vec3 bary_gradient(const SurfaceMesh& mesh, int f, int k) {
  const Vec3 e = mesh.corner(f, (k + 2) % 3) - mesh.corner(f, (k + 1) % 3);
  return mesh.normal(f).cross(e) / (2.0 * mesh.area(f));
}

Vec3 project_to_plane(const Vec3& v, const Vec3& n) { return v - v.dot(n) * n; }

Vec3 clamp_bary(Vec3 b) {
  b = b.cwiseMax(0.0);
  return b / b.sum();
}

int wedge_index(const VertexFan& fan, int face) {
  for (size_t i = 0; i < fan.wedges.size(); ++i)
    if (fan.wedges[i].face == face) return static_cast<int>(i);
  return -1;
}

struct VertexExit {
  int face;
  int corner;
  Vec3 direction;
};

// Direction leaving vertex `v` at fan angle `phi` (measured counterclockwise
// from the first edge of wedge 0).
VertexExit exit_at_fan_angle(const SurfaceMesh& mesh, int v, double phi) {
  const VertexFan& fan = mesh.fan(v);
  double start = 0.0;
  size_t j = 0;
  for (; j + 1 < fan.wedges.size(); ++j) {
    if (phi < start + fan.wedges[j].angle) break;
    start += fan.wedges[j].angle;
  }
  const FanEntry& w = fan.wedges[j];
  const double psi = std::clamp(phi - start, 0.0, w.angle);
  const Vec3 first_edge = (mesh.corner(w.face, (w.corner + 1) % 3) - mesh.vertex(v)).normalized();
  return {w.face, w.corner, rotate_about(first_edge, mesh.normal(w.face), psi).normalized()};
}

double fan_offset(const VertexFan& fan, int wedge) {
  double c = 0.0;
  for (int i = 0; i < wedge; ++i) c += fan.wedges[i].angle;
  return c;
}

// Fan angle of direction `d` (in the plane of `face`) at vertex `v`.
double fan_angle_of(const SurfaceMesh& mesh, int v, int face, const Vec3& d) {
  const VertexFan& fan = mesh.fan(v);
  const int i = wedge_index(fan, face);
  const FanEntry& w = fan.wedges[i];
  const Vec3 first_edge = mesh.corner(face, (w.corner + 1) % 3) - mesh.vertex(v);
  return fan_offset(fan, i) + signed_angle(mesh.normal(face), first_edge, d);
}

}  // namespace

Vec3 rotate_about(const Vec3& dir, const Vec3& n, double angle) {
  return std::cos(angle) * dir + std::sin(angle) * n.cross(dir) +
         (1.0 - std::cos(angle)) * n.dot(dir) * n;
}

double signed_angle(const Vec3& n, const Vec3& a, const Vec3& b) {
  const double angle = std::atan2(n.dot(a.cross(b)), a.dot(b));
  return angle <= -kPi ? kPi : angle;
}

Vec3 barycentric_in_face(const SurfaceMesh& mesh, int f, const Vec3& pos) {
  return closest_point_on_triangle(pos, mesh.corner(f, 0), mesh.corner(f, 1), mesh.corner(f, 2));
}

SurfacePoint express_in_face(const SurfaceMesh& mesh, const SurfacePoint& p, int f) {
  if (p.face == f) return p;
  return {f, barycentric_in_face(mesh, f, mesh.position(p))};
}

int vertex_at(const SurfaceMesh& mesh, const SurfacePoint& p, double tol) {
  int k = 0;
  p.bary.maxCoeff(&k);
  return p.bary[k] >= 1.0 - tol ? mesh.face(p.face)[k] : -1;
}

std::vector<int> faces_containing(const SurfaceMesh& mesh, const SurfacePoint& p, double tol) {
  const int v = vertex_at(mesh, p, tol);
  if (v >= 0) {
    std::vector<int> out;
    for (const FanEntry& w : mesh.fan(v).wedges) out.push_back(w.face);
    return out;
  }
  for (int k = 0; k < 3; ++k) {
    if (p.bary[k] < tol) {
      const int g = mesh.neighbor(p.face, k);
      if (g >= 0) return {p.face, g};
      break;
    }
  }
  return {p.face};
}

std::vector<Vec3> GeodesicPath::positions(const SurfaceMesh& mesh) const {
  std::vector<Vec3> out;
  out.reserve(waypoints.size());
  for (const SurfacePoint& w : waypoints) out.push_back(mesh.position(w));
  return out;
}

std::vector<double> GeodesicPath::arclengths(const SurfaceMesh& mesh) const {
  const std::vector<Vec3> pos = positions(mesh);
  std::vector<double> out(pos.size(), 0.0);
  for (size_t i = 1; i < pos.size(); ++i) out[i] = out[i - 1] + (pos[i] - pos[i - 1]).norm();
  return out;
}

// ---------------------------------------------------------------------------
// Straightest geodesic tracing

GeodesicPath trace_straightest_geodesic(const SurfaceMesh& mesh, const TangentDirection& start,
                                        double length) {
  require(length > 0.0, ErrorKind::InvalidArgument, "trace length must be positive");
  int f = start.base.face;
  require(f >= 0 && f < mesh.num_faces(), ErrorKind::InvalidArgument, "start face out of range");
  Vec3 lam = clamp_bary(start.base.bary);
  Vec3 d = project_to_plane(start.direction, mesh.normal(f));
  require(d.norm() > 1e-12, ErrorKind::DegenerateDirection, "start direction is not tangent");
  d.normalize();

  GeodesicPath path;
  path.initial_direction = d;
  path.waypoints.push_back({f, lam});

  if (const int v = vertex_at(mesh, {f, lam}); v >= 0) {
    const VertexFan& fan = mesh.fan(v);
    double phi = fan_angle_of(mesh, v, f, d);
    if (fan.closed) {
      phi = std::fmod(phi, fan.total_angle);
      if (phi < 0.0) phi += fan.total_angle;
    } else if (phi < -1e-12 || phi > fan.total_angle + 1e-12) {
      throw Error(ErrorKind::TracingStuck, "start direction leaves the surface at a boundary vertex");
    }
    const VertexExit ex = exit_at_fan_angle(mesh, v, phi);
    f = ex.face;
    lam = Vec3::Zero();
    lam[ex.corner] = 1.0;
    d = ex.direction;
    path.waypoints.front() = {f, lam};
  }

  double remaining = length;
  const int max_steps = 16 * mesh.num_faces() + 1024;
  for (int step = 0; step < max_steps; ++step) {
    Vec3 dl;
    for (int k = 0; k < 3; ++k) dl[k] = bary_gradient(mesh, f, k).dot(d);
    double s = std::numeric_limits<double>::infinity();
    int exit_k = -1;
    for (int k = 0; k < 3; ++k) {
      if (dl[k] < -1e-14) {
        const double sk = std::max(lam[k], 0.0) / -dl[k];
        if (sk < s) {
          s = sk;
          exit_k = k;
        }
      }
    }
    if (exit_k < 0) throw Error(ErrorKind::TracingStuck, "direction left the face plane");

    if (s >= remaining) {
      path.waypoints.push_back({f, clamp_bary(lam + remaining * dl)});
      path.segment_faces.push_back(f);
      path.length = path.arclengths(mesh).back();
      return path;
    }

    Vec3 exit = lam + s * dl;
    exit[exit_k] = 0.0;
    exit = clamp_bary(exit);
    remaining -= s;
    if (s > 1e-15) {
      path.waypoints.push_back({f, exit});
      path.segment_faces.push_back(f);
    }

    int corner_hit = -1;
    for (int j = 0; j < 3; ++j)
      if (j != exit_k && exit[j] < kVertexTol) corner_hit = 3 - exit_k - j;

    if (corner_hit >= 0) {
      const int v = mesh.face(f)[corner_hit];
      const VertexFan& fan = mesh.fan(v);
      if (!fan.closed) throw Error(ErrorKind::TracingStuck, "path hit a boundary vertex");
      const int i = wedge_index(fan, f);
      const Vec3 first_edge = mesh.corner(f, (corner_hit + 1) % 3) - mesh.vertex(v);
      const double local =
          std::clamp(signed_angle(mesh.normal(f), first_edge, -d), 0.0, fan.wedges[i].angle);
      double phi = fan_offset(fan, i) + local + 0.5 * fan.total_angle;
      phi = std::fmod(phi, fan.total_angle);
      const VertexExit ex = exit_at_fan_angle(mesh, v, phi);
      f = ex.face;
      lam = Vec3::Zero();
      lam[ex.corner] = 1.0;
      d = ex.direction;
      continue;
    }

    const int g = mesh.neighbor(f, exit_k);
    if (g < 0) throw Error(ErrorKind::TracingStuck, "path hit a boundary edge");
    const int va = mesh.face(f)[(exit_k + 1) % 3];
    const int vb = mesh.face(f)[(exit_k + 2) % 3];
    const Vec3 e = (mesh.vertex(vb) - mesh.vertex(va)).normalized();
    const Vec3 wf = mesh.normal(f).cross(e);
    const Vec3 wg = mesh.normal(g).cross(e);
    d = (d.dot(e) * e + d.dot(wf) * wg).normalized();
    Vec3 lam_g = Vec3::Zero();
    lam_g[mesh.corner_of(g, va)] = exit[(exit_k + 1) % 3];
    lam_g[mesh.corner_of(g, vb)] = exit[(exit_k + 2) % 3];
    f = g;
    lam = lam_g;
  }
  throw Error(ErrorKind::TracingStuck, "step limit exceeded");
}

// ---------------------------------------------------------------------------
// Shortest paths

namespace {

// Vertices, 3 Steiner points per edge, plus the two endpoints.
class SteinerGraph {
 public:
  SteinerGraph(const SurfaceMesh& mesh, const SurfacePoint& a, const SurfacePoint& b)
      : mesh_(mesh),
        nv_(mesh.num_vertices()),
        ne_(mesh.num_edges()),
        a_(mesh.position(a)),
        b_(mesh.position(b)),
        a_faces_(faces_containing(mesh, a)),
        b_faces_(faces_containing(mesh, b)),
        a_vertex_(vertex_at(mesh, a)),
        b_vertex_(vertex_at(mesh, b)) {}

  int source() const { return nv_ + 3 * ne_; }
  int target() const { return nv_ + 3 * ne_ + 1; }
  int size() const { return nv_ + 3 * ne_ + 2; }

  Vec3 position(int n) const {
    if (n < nv_) return mesh_.vertex(n);
    if (n == source()) return a_;
    if (n == target()) return b_;
    const int e = (n - nv_) / 3;
    const int j = (n - nv_) % 3;
    const auto [va, vb] = mesh_.edge_vertices(e);
    return mesh_.vertex(va) + (j + 1) / 4.0 * (mesh_.vertex(vb) - mesh_.vertex(va));
  }

  /// Mesh vertex the node sits on, or -1.
  int vertex_of(int n) const {
    if (n < nv_) return n;
    if (n == source()) return a_vertex_;
    if (n == target()) return b_vertex_;
    return -1;
  }

  template <typename Fn>
  void for_each_face(int n, Fn&& fn) const {
    if (n < nv_) {
      for (const FanEntry& w : mesh_.fan(n).wedges) fn(w.face);
    } else if (n == source()) {
      for (int f : a_faces_) fn(f);
    } else if (n == target()) {
      for (int f : b_faces_) fn(f);
    } else {
      const auto [f, g] = mesh_.edge_faces((n - nv_) / 3);
      fn(f);
      if (g >= 0) fn(g);
    }
  }

  template <typename Fn>
  void for_each_node_of_face(int f, Fn&& fn) const {
    for (int k = 0; k < 3; ++k) {
      fn(mesh_.face(f)[k]);
      const int e = mesh_.edge_id(f, k);
      for (int j = 0; j < 3; ++j) fn(nv_ + 3 * e + j);
    }
    if (std::find(a_faces_.begin(), a_faces_.end(), f) != a_faces_.end()) fn(source());
    if (std::find(b_faces_.begin(), b_faces_.end(), f) != b_faces_.end()) fn(target());
  }

 private:
  const SurfaceMesh& mesh_;
  int nv_;
  int ne_;
  Vec3 a_;
  Vec3 b_;
  std::vector<int> a_faces_;
  std::vector<int> b_faces_;
  int a_vertex_;
  int b_vertex_;
};

struct GraphPath {
  std::vector<int> nodes;
  std::vector<int> via_faces;  // via_faces[i] holds nodes[i] and nodes[i+1]
};

GraphPath astar(const SteinerGraph& g) {
  const int n = g.size();
  const Vec3 goal = g.position(g.target());
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  std::vector<int> via(n, -1);
  std::vector<char> done(n, 0);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  cost[g.source()] = 0.0;
  open.emplace((g.position(g.source()) - goal).norm(), g.source());
  while (!open.empty()) {
    const int u = open.top().second;
    open.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == g.target()) break;
    const Vec3 pu = g.position(u);
    g.for_each_face(u, [&](int f) {
      g.for_each_node_of_face(f, [&](int w) {
        if (w == u || done[w]) return;
        const Vec3 pw = g.position(w);
        const double c = cost[u] + (pw - pu).norm();
        if (c < cost[w]) {
          cost[w] = c;
          prev[w] = u;
          via[w] = f;
          open.emplace(c + (pw - goal).norm(), w);
        }
      });
    });
  }
  if (!done[g.target()]) throw Error(ErrorKind::Disconnected, "no path between the endpoints");
  GraphPath path;
  for (int u = g.target(); u != -1; u = prev[u]) {
    path.nodes.push_back(u);
    if (prev[u] != -1) path.via_faces.push_back(via[u]);
  }
  std::reverse(path.nodes.begin(), path.nodes.end());
  std::reverse(path.via_faces.begin(), path.via_faces.end());
  return path;
}

// Faces strictly between `from` and `to` walking around vertex `v`,
// `ccw` choosing the rotational direction. Empty optional if the walk
// hits a boundary.
std::optional<std::vector<int>> fan_walk(const SurfaceMesh& mesh, int v, int from, int to,
                                         bool ccw, double* angle_out) {
  const VertexFan& fan = mesh.fan(v);
  const int n = static_cast<int>(fan.wedges.size());
  int i = wedge_index(fan, from);
  const int j = wedge_index(fan, to);
  if (i < 0 || j < 0) return std::nullopt;
  std::vector<int> out;
  double angle = 0.0;
  while (true) {
    int next = ccw ? i + 1 : i - 1;
    if (fan.closed) {
      next = (next + n) % n;
    } else if (next < 0 || next >= n) {
      return std::nullopt;
    }
    if (next == j) break;
    if (next == wedge_index(fan, from)) return std::nullopt;
    out.push_back(fan.wedges[next].face);
    angle += fan.wedges[next].angle;
    i = next;
  }
  if (angle_out != nullptr) *angle_out = angle;
  return out;
}

bool adjacent(const SurfaceMesh& mesh, int f, int g) {
  for (int k = 0; k < 3; ++k)
    if (mesh.neighbor(f, k) == g) return true;
  return false;
}

void push_face(std::vector<int>& strip, int f) {
  if (!strip.empty() && strip.back() == f) return;
  if (strip.size() >= 2 && strip[strip.size() - 2] == f) {
    strip.pop_back();
    return;
  }
  strip.push_back(f);
}

void connect_via_vertex(const SurfaceMesh& mesh, std::vector<int>& strip, int v, int to) {
  const int from = strip.back();
  double angle_ccw = 0.0;
  double angle_cw = 0.0;
  auto ccw = fan_walk(mesh, v, from, to, true, &angle_ccw);
  auto cw = fan_walk(mesh, v, from, to, false, &angle_cw);
  const std::vector<int>* walk = nullptr;
  if (ccw && cw) {
    walk = angle_ccw <= angle_cw ? &*ccw : &*cw;
  } else if (ccw) {
    walk = &*ccw;
  } else if (cw) {
    walk = &*cw;
  }
  require(walk != nullptr, ErrorKind::Disconnected, "cannot walk around vertex");
  for (int f : *walk) push_face(strip, f);
  push_face(strip, to);
}

std::vector<int> strip_from_graph_path(const SurfaceMesh& mesh, const SteinerGraph& graph,
                                       const GraphPath& gp, int start_face) {
  std::vector<int> strip{start_face};
  for (size_t i = 0; i < gp.via_faces.size(); ++i) {
    const int f = gp.via_faces[i];
    if (strip.back() == f) continue;
    const int v = graph.vertex_of(gp.nodes[i]);
    if (v >= 0) {
      connect_via_vertex(mesh, strip, v, f);
    } else {
      require(adjacent(mesh, strip.back(), f), ErrorKind::Disconnected,
              "graph path jumps between non-adjacent faces");
      push_face(strip, f);
    }
  }
  return strip;
}

struct Portal {
  Vec2 left;
  Vec2 right;
  int left_vertex = -1;
  int right_vertex = -1;
};

struct Unfolding {
  std::vector<std::array<Vec2, 3>> corners;  // per strip face, indexed by local corner
  Vec3 ex;
  Vec3 ey;
  std::vector<Portal> portals;  // portals[i] separates strip[i-1] and strip[i]; [0] and back are endpoints
};

Unfolding unfold_strip(const SurfaceMesh& mesh, const std::vector<int>& strip, const Vec3& a,
                       const Vec3& b, int a_face) {
  Unfolding u;
  const int f0 = strip.front();
  const Vec3 c0 = mesh.corner(f0, 0);
  u.ex = (mesh.corner(f0, 1) - c0).normalized();
  u.ey = mesh.normal(f0).cross(u.ex);
  std::array<Vec2, 3> first;
  for (int k = 0; k < 3; ++k) {
    const Vec3 d = mesh.corner(f0, k) - c0;
    first[k] = Vec2(d.dot(u.ex), d.dot(u.ey));
  }
  u.corners.push_back(first);

  for (size_t i = 1; i < strip.size(); ++i) {
    const int f = strip[i - 1];
    const int g = strip[i];
    int k = 0;
    while (k < 3 && mesh.neighbor(f, k) != g) ++k;
    require(k < 3, ErrorKind::Disconnected, "strip faces are not adjacent");
    const int kp = (k + 1) % 3;  // right end of the portal
    const int kl = (k + 2) % 3;  // left end
    const int vp = mesh.face(f)[kp];
    const int vl = mesh.face(f)[kl];
    const Vec2 p2 = u.corners[i - 1][kp];
    const Vec2 q2 = u.corners[i - 1][kl];
    const int gp = mesh.corner_of(g, vp);
    const int gq = mesh.corner_of(g, vl);
    const int gr = 3 - gp - gq;
    const Vec3 p3 = mesh.vertex(vp);
    const Vec3 e3 = (mesh.vertex(vl) - p3).normalized();
    const Vec3 r3 = mesh.corner(g, gr) - p3;
    const double along = r3.dot(e3);
    const double perp = (r3 - along * e3).norm();
    const Vec2 e2 = (q2 - p2).normalized();
    const Vec2 n2(-e2.y(), e2.x());
    std::array<Vec2, 3> c;
    c[gp] = p2;
    c[gq] = q2;
    c[gr] = p2 + along * e2 + perp * n2;
    if (orient2(c[0], c[1], c[2]) < 0.0) c[gr] = p2 + along * e2 - perp * n2;
    u.corners.push_back(c);
    u.portals.push_back({q2, p2, vl, vp});
  }

  auto to2d = [&](int idx, const Vec3& bary) {
    return Vec2(bary[0] * u.corners[idx][0] + bary[1] * u.corners[idx][1] +
                bary[2] * u.corners[idx][2]);
  };
  const Vec2 a2 = to2d(0, barycentric_in_face(mesh, a_face, a));
  const int last = static_cast<int>(strip.size()) - 1;
  const Vec2 b2 = to2d(last, barycentric_in_face(mesh, strip.back(), b));
  u.portals.insert(u.portals.begin(), Portal{a2, a2, -1, -1});
  u.portals.push_back(Portal{b2, b2, -1, -1});
  return u;
}

struct Apex {
  Vec2 point;
  int vertex;
  int portal;
};

// Portals sharing an endpoint can re-emit the current apex; keep the first.
void push_apex(std::vector<Apex>& out, const Apex& a) {
  if (!out.empty() && out.back().point == a.point) return;
  out.push_back(a);
}

// Simple stupid funnel algorithm over the unfolded strip.
std::vector<Apex> funnel(const std::vector<Portal>& portals) {
  std::vector<Apex> out;
  Vec2 apex = portals[0].left;
  Vec2 left = apex;
  Vec2 right = apex;
  int apex_idx = 0, left_idx = 0, right_idx = 0;
  int apex_v = -1, left_v = -1, right_v = -1;
  out.push_back({apex, -1, 0});
  const int n = static_cast<int>(portals.size());
  for (int i = 1; i < n; ++i) {
    const Portal& p = portals[i];
    if (orient2(apex, right, p.right) >= 0.0) {
      if (apex == right || orient2(apex, left, p.right) < 0.0) {
        right = p.right;
        right_idx = i;
        right_v = p.right_vertex;
      } else {
        apex = left;
        apex_idx = left_idx;
        apex_v = left_v;
        push_apex(out, {apex, apex_v, apex_idx});
        right = left = apex;
        right_idx = left_idx = apex_idx;
        right_v = left_v = apex_v;
        i = apex_idx;
        continue;
      }
    }
    if (orient2(apex, left, p.left) <= 0.0) {
      if (apex == left || orient2(apex, right, p.left) > 0.0) {
        left = p.left;
        left_idx = i;
        left_v = p.left_vertex;
      } else {
        apex = right;
        apex_idx = right_idx;
        apex_v = right_v;
        push_apex(out, {apex, apex_v, apex_idx});
        right = left = apex;
        right_idx = left_idx = apex_idx;
        right_v = left_v = apex_v;
        i = apex_idx;
        continue;
      }
    }
  }
  if (out.size() > 1 && out.back().point == portals.back().left) out.pop_back();
  out.push_back({portals.back().left, -1, n - 1});
  return out;
}

bool portal_has(const Portal& p, int v) { return v >= 0 && (p.left_vertex == v || p.right_vertex == v); }

GeodesicPath path_from_funnel(const SurfaceMesh& mesh, const std::vector<int>& strip,
                              const Unfolding& u, const std::vector<Apex>& apexes,
                              const SurfacePoint& a, const SurfacePoint& b) {
  GeodesicPath path;
  path.waypoints.push_back(a);
  const int n = static_cast<int>(u.portals.size());
  size_t seg = 0;
  for (int i = 1; i + 1 < n; ++i) {
    const Portal& p = u.portals[i];
    const int face_before = strip[i - 1];
    const Apex& next = apexes[seg + 1];
    if (portal_has(p, next.vertex)) {
      const int v = next.vertex;
      const bool repeat = !path.waypoints.empty() && vertex_at(mesh, path.waypoints.back()) == v;
      if (!repeat) {
        SurfacePoint w{face_before, Vec3::Zero()};
        w.bary[mesh.corner_of(face_before, v)] = 1.0;
        path.waypoints.push_back(w);
        path.segment_faces.push_back(face_before);
      }
      if (!(i + 2 < n && portal_has(u.portals[i + 1], v))) ++seg;
      continue;
    }
    const Vec2 s0 = apexes[seg].point;
    const Vec2 d = next.point - s0;
    const Vec2 e = p.left - p.right;
    const double den = cross2(d, e);
    double t = 0.5;
    if (std::abs(den) > 1e-300) t = cross2(p.right - s0, d) / den;
    t = std::clamp(t, 0.0, 1.0);
    SurfacePoint w{face_before, Vec3::Zero()};
    w.bary[mesh.corner_of(face_before, p.right_vertex)] = 1.0 - t;
    w.bary[mesh.corner_of(face_before, p.left_vertex)] = t;
    path.waypoints.push_back(w);
    path.segment_faces.push_back(face_before);
  }
  path.waypoints.push_back(express_in_face(mesh, b, strip.back()));
  path.segment_faces.push_back(strip.back());
  path.length = path.arclengths(mesh).back();
  const Vec2 d0 = apexes[1].point - apexes[0].point;
  if (d0.norm() > 0.0) path.initial_direction = (d0.x() * u.ex + d0.y() * u.ey).normalized();
  return path;
}

// Replaces the faces around `v` used by the strip with the other side of
// the fan. Returns false when no reroute is possible.
bool reroute_around(const SurfaceMesh& mesh, std::vector<int>& strip, int v, int portal) {
  int s = portal - 1;
  int e = portal;
  auto has_v = [&](int idx) { return mesh.corner_of(strip[idx], v) >= 0; };
  while (s > 0 && has_v(s - 1)) --s;
  while (e + 1 < static_cast<int>(strip.size()) && has_v(e + 1)) ++e;
  const VertexFan& fan = mesh.fan(v);
  if (!fan.closed || e - s + 1 > static_cast<int>(fan.wedges.size())) return false;
  const int n = static_cast<int>(fan.wedges.size());
  const int i0 = wedge_index(fan, strip[s]);
  const int i1 = wedge_index(fan, strip[s + 1]);
  const bool run_ccw = (i0 + 1) % n == i1;
  auto other = fan_walk(mesh, v, strip[s], strip[e], !run_ccw, nullptr);
  if (!other) return false;
  std::vector<int> next(strip.begin(), strip.begin() + s + 1);
  for (int f : *other) push_face(next, f);
  for (int i = e; i < static_cast<int>(strip.size()); ++i) push_face(next, strip[i]);
  strip = std::move(next);
  return true;
}

// Endpoints on edges or vertices belong to several faces; the strip starts at
// the last face holding `a` and ends at the first face after it holding `b`.
void trim_strip(const SurfaceMesh& mesh, std::vector<int>& strip, const SurfacePoint& a,
                const SurfacePoint& b) {
  const auto a_faces = faces_containing(mesh, a);
  const auto b_faces = faces_containing(mesh, b);
  auto holds = [](const std::vector<int>& set, int f) {
    return std::find(set.begin(), set.end(), f) != set.end();
  };
  size_t first = 0;
  for (size_t i = 0; i < strip.size(); ++i)
    if (holds(a_faces, strip[i])) first = i;
  size_t last = strip.size() - 1;
  for (size_t i = first; i < strip.size(); ++i)
    if (holds(b_faces, strip[i])) {
      last = i;
      break;
    }
  strip = std::vector<int>(strip.begin() + first, strip.begin() + last + 1);
}

// Carries a tangent direction from face `g` into an edge-adjacent face `f`
// by unfolding about the shared edge.
Vec3 unfold_direction(const SurfaceMesh& mesh, int g, int f, const Vec3& d) {
  int k = 0;
  while (k < 3 && mesh.neighbor(g, k) != f) ++k;
  if (k == 3) return d;
  const Vec3 e = (mesh.corner(g, (k + 2) % 3) - mesh.corner(g, (k + 1) % 3)).normalized();
  return (d.dot(e) * e + d.dot(mesh.normal(g).cross(e)) * mesh.normal(f).cross(e)).normalized();
}

double wrap_angle(double x, double period) {
  x = std::fmod(x, period);
  if (x > 0.5 * period) x -= period;
  if (x <= -0.5 * period) x += period;
  return x;
}

// Funnel passes with reroutes around vertices until the path is locally
// shortest within its strip.
GeodesicPath straighten(const SurfaceMesh& mesh, std::vector<int>& strip, const SurfacePoint& a,
                        const SurfacePoint& b) {
  const Vec3 pa = mesh.position(a);
  const Vec3 pb = mesh.position(b);
  GeodesicPath best;
  const int max_passes = 4 * mesh.num_faces() + 64;
  for (int pass = 0; pass < max_passes; ++pass) {
    trim_strip(mesh, strip, a, b);
    const SurfacePoint a_start = express_in_face(mesh, a, strip.front());
    const Unfolding u = unfold_strip(mesh, strip, pa, pb, strip.front());
    const std::vector<Apex> apexes = funnel(u.portals);
    best = path_from_funnel(mesh, strip, u, apexes, a_start, b);

    // Find the bend whose opposite side is the most open (< pi means shorter).
    int pick = -1;
    double pick_angle = kPi - 1e-9;
    for (size_t j = 1; j + 1 < apexes.size(); ++j) {
      const int v = apexes[j].vertex;
      if (v < 0 || !mesh.fan(v).closed) continue;
      const Vec2 in = apexes[j - 1].point - apexes[j].point;
      const Vec2 out = apexes[j + 1].point - apexes[j].point;
      const double alpha = std::atan2(std::abs(cross2(in, out)), in.dot(out));
      const double other_side = mesh.fan(v).total_angle - (2.0 * kPi - alpha);
      if (other_side < pick_angle) {
        pick_angle = other_side;
        pick = static_cast<int>(j);
      }
    }
    if (pick < 0) break;
    if (!reroute_around(mesh, strip, apexes[pick].vertex, apexes[pick].portal)) break;
  }
  return best;
}

// Interior vertices the path passes within `frac` of an edge length, each
// with a strip portal index where both neighbouring faces hold the vertex.
std::vector<std::pair<int, int>> near_vertices(const SurfaceMesh& mesh, const std::vector<int>& strip,
                                               const GeodesicPath& path, double frac) {
  std::vector<std::pair<int, int>> out;
  for (size_t i = 1; i + 1 < path.waypoints.size(); ++i) {
    const SurfacePoint& w = path.waypoints[i];
    if (vertex_at(mesh, w) >= 0) continue;
    for (int k = 0; k < 3; ++k) {
      if (w.bary[k] < 1.0 - frac || w.bary[k] >= 1.0 - kVertexTol) continue;
      const int v = mesh.face(w.face)[k];
      if (!mesh.fan(v).closed) continue;
      if (std::any_of(out.begin(), out.end(), [&](const auto& x) { return x.first == v; })) continue;
      for (size_t j = 1; j < strip.size(); ++j)
        if (mesh.corner_of(strip[j - 1], v) >= 0 && mesh.corner_of(strip[j], v) >= 0) {
          out.emplace_back(v, static_cast<int>(j));
          break;
        }
    }
  }
  return out;
}

}  // namespace

GeodesicPath shortest_geodesic_path(const SurfaceMesh& mesh, const SurfacePoint& a,
                                    const SurfacePoint& b) {
  require(a.face >= 0 && a.face < mesh.num_faces() && b.face >= 0 && b.face < mesh.num_faces(),
          ErrorKind::InvalidArgument, "surface point face out of range");
  if (mesh.component(a.face) != mesh.component(b.face))
    throw Error(ErrorKind::Disconnected, "endpoints lie on different components");

  const Vec3 pa = mesh.position(a);
  const Vec3 pb = mesh.position(b);
  if ((pa - pb).norm() < 1e-15) {
    GeodesicPath path;
    path.waypoints = {a, express_in_face(mesh, b, a.face)};
    path.segment_faces = {a.face};
    return path;
  }

  std::vector<int> strip;
  const auto b_faces = faces_containing(mesh, b);
  if (std::find(b_faces.begin(), b_faces.end(), a.face) != b_faces.end()) {
    strip = {a.face};
  } else {
    const SteinerGraph graph(mesh, a, b);
    strip = strip_from_graph_path(mesh, graph, astar(graph), a.face);
  }

  GeodesicPath best = straighten(mesh, strip, a, b);

  // On positively curved meshes a path can be locally straight on either side
  // of a vertex it passes close to. Try the other side of each such vertex.
  for (int round = 0; round < 8; ++round) {
    bool improved = false;
    for (const auto& [v, portal] : near_vertices(mesh, strip, best, 0.1)) {
      std::vector<int> alt = strip;
      if (!reroute_around(mesh, alt, v, portal)) continue;
      const GeodesicPath cand = straighten(mesh, alt, a, b);
      if (cand.length < best.length - 1e-12) {
        best = cand;
        strip = std::move(alt);
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return best;
}

LogCoordinates log_map(const SurfaceMesh& mesh, const TangentDirection& base,
                       const SurfacePoint& target) {
  const GeodesicPath path = shortest_geodesic_path(mesh, base.base, target);
  if (path.length <= 1e-15) return {0.0, 0.0};
  const int f = base.base.face;
  const int s = path.waypoints.front().face;
  const Vec3& n = mesh.normal(f);
  const Vec3 t = project_to_plane(base.direction, n);
  require(t.norm() > 1e-12, ErrorKind::DegenerateDirection, "base tangent is not in the face plane");
  if (const int v = vertex_at(mesh, base.base); v >= 0 && mesh.fan(v).closed) {
    const double phi = fan_angle_of(mesh, v, s, path.initial_direction) - fan_angle_of(mesh, v, f, t);
    return {path.length, wrap_angle(phi, mesh.fan(v).total_angle)};
  }
  const Vec3 d = s == f ? path.initial_direction : unfold_direction(mesh, s, f, path.initial_direction);
  return {path.length, signed_angle(n, t, d)};
}

SurfacePoint exp_map(const SurfaceMesh& mesh, const TangentDirection& base, double distance,
                     double angle) {
  require(distance >= 0.0, ErrorKind::InvalidArgument, "exp_map distance must be nonnegative");
  if (distance <= 1e-15) return base.base;
  const Vec3& n = mesh.normal(base.base.face);
  const Vec3 t = project_to_plane(base.direction, n);
  require(t.norm() > 1e-12, ErrorKind::DegenerateDirection, "base tangent is not in the face plane");
  TangentDirection start{base.base, rotate_about(t.normalized(), n, angle)};
  if (const int v = vertex_at(mesh, base.base); v >= 0 && mesh.fan(v).closed) {
    // Angles at vertices are fan angles, so the rotation may wrap past 2*pi.
    const double total = mesh.fan(v).total_angle;
    double phi = std::fmod(fan_angle_of(mesh, v, base.base.face, t) + angle, total);
    if (phi < 0.0) phi += total;
    const VertexExit ex = exit_at_fan_angle(mesh, v, phi);
    Vec3 lam = Vec3::Zero();
    lam[ex.corner] = 1.0;
    start = {{ex.face, lam}, ex.direction};
  }
  return trace_straightest_geodesic(mesh, start, distance).waypoints.back();
}

std::vector<NearestSource> nearest_sources(const SurfaceMesh& mesh,
                                           std::span<const SurfacePoint> sources) {
  const int nv = mesh.num_vertices();
  const int ns = static_cast<int>(sources.size());
  const int n = nv + 3 * mesh.num_edges() + ns;
  std::vector<std::vector<int>> face_sources(mesh.num_faces());
  std::vector<std::vector<int>> source_faces(ns);
  for (int i = 0; i < ns; ++i) {
    source_faces[i] = faces_containing(mesh, sources[i]);
    for (int f : source_faces[i]) face_sources[f].push_back(nv + 3 * mesh.num_edges() + i);
  }
  auto position = [&](int u) -> Vec3 {
    if (u < nv) return mesh.vertex(u);
    if (u >= n - ns) return mesh.position(sources[u - (n - ns)]);
    const int e = (u - nv) / 3;
    const auto [va, vb] = mesh.edge_vertices(e);
    return mesh.vertex(va) + ((u - nv) % 3 + 1) / 4.0 * (mesh.vertex(vb) - mesh.vertex(va));
  };
  auto for_each_face = [&](int u, auto&& fn) {
    if (u < nv) {
      for (const FanEntry& w : mesh.fan(u).wedges) fn(w.face);
    } else if (u >= n - ns) {
      for (int f : source_faces[u - (n - ns)]) fn(f);
    } else {
      const auto [f, g] = mesh.edge_faces((u - nv) / 3);
      fn(f);
      if (g >= 0) fn(g);
    }
  };

  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> label(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
  for (int i = 0; i < ns; ++i) {
    const int u = n - ns + i;
    dist[u] = 0.0;
    label[u] = i;
    open.emplace(0.0, u);
  }
  while (!open.empty()) {
    const auto [du, u] = open.top();
    open.pop();
    if (du > dist[u]) continue;
    const Vec3 pu = position(u);
    for_each_face(u, [&](int f) {
      auto relax = [&](int w) {
        const double c = du + (position(w) - pu).norm();
        if (c < dist[w]) {
          dist[w] = c;
          label[w] = label[u];
          open.emplace(c, w);
        }
      };
      for (int k = 0; k < 3; ++k) {
        relax(mesh.face(f)[k]);
        const int e = mesh.edge_id(f, k);
        for (int j = 0; j < 3; ++j) relax(nv + 3 * e + j);
      }
      for (int w : face_sources[f]) relax(w);
    });
  }
  std::vector<NearestSource> out(nv);
  for (int v = 0; v < nv; ++v) out[v] = {label[v], dist[v]};
  return out;
}

TangentDirection point_at_arclength(const SurfaceMesh& mesh, const GeodesicPath& path,
                                    std::span<const double> arclengths, double s) {
  require(path.waypoints.size() >= 2, ErrorKind::InvalidArgument, "path has no segments");
  const double total = arclengths.back();
  s = std::clamp(s, 0.0, total);
  const std::vector<Vec3> pos = path.positions(mesh);
  size_t i = 0;
  while (i + 2 < pos.size() && arclengths[i + 1] < s) ++i;
  // Skip zero-length segments for the tangent.
  size_t j = i;
  while (j + 2 < pos.size() && (pos[j + 1] - pos[j]).norm() < 1e-15) ++j;
  const double seg = arclengths[i + 1] - arclengths[i];
  const double w = seg > 0.0 ? (s - arclengths[i]) / seg : 0.0;
  const Vec3 p = (1.0 - w) * pos[i] + w * pos[i + 1];
  // When segment i has zero length, p coincides with the start of segment j.
  const int f = path.segment_faces[j];
  Vec3 tangent = pos[j + 1] - pos[j];
  if (tangent.norm() < 1e-15) tangent = path.initial_direction;
  tangent = project_to_plane(tangent, mesh.normal(f)).normalized();
  return {{f, barycentric_in_face(mesh, f, p)}, tangent};
}

}  // namespace pico
