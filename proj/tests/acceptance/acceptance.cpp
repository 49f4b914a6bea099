// One PASS/FAIL line per primary acceptance criterion; exit status 1 if any fails.

#include "pico/contact/transfer.hpp"
#include "pico/eval/metrics.hpp"
#include "pico/fit/fit.hpp"
#include "pico/mesh/geodesic.hpp"
#include "pico/mesh/shapes.hpp"
#include "pico/retrieval/store.hpp"
#include "pico/synth/scenes.hpp"

#include "geometry_oracles.hpp"
#include "metric_oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace pico;
using namespace pico::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

class Timer {
 public:
  double seconds() const { return std::chrono::duration<double>(clock::now() - t0_).count(); }

 private:
  using clock = std::chrono::steady_clock;
  clock::time_point t0_ = clock::now();
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<int> closest_n(const SurfaceMesh& m, const Vec3& c, size_t n) {
  std::vector<int> idx(m.num_vertices());
  std::iota(idx.begin(), idx.end(), 0);
  std::partial_sort(idx.begin(), idx.begin() + n, idx.end(), [&](int a, int b) {
    return (m.vertex(a) - c).squaredNorm() < (m.vertex(b) - c).squaredNorm();
  });
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  return idx;
}

// [1] exp_map(log_map(p)) == p on a plane and an icosphere, 200 targets each, < 10 s.
Outcome geodesic_round_trip() {
  Timer t;
  double worst_plane = 0.0, worst_sphere = 0.0;
  const SurfaceMesh plane = shapes::plane_grid(12, 2.0);
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  for (int i = 0; i < 200; ++i) {
    const TangentDirection base{plane.closest_point(Vec3(0.2 * u(rng), 0.2 * u(rng), 0)).point,
                                Vec3(u(rng), u(rng), 0).normalized()};
    const SurfacePoint target = plane.closest_point(Vec3(u(rng), u(rng), 0)).point;
    const LogCoordinates lc = log_map(plane, base, target);
    worst_plane = std::max(worst_plane,
                           (plane.position(exp_map(plane, base, lc.distance, lc.angle)) - plane.position(target)).norm());
  }
  const SurfaceMesh sphere = shapes::icosphere(3, 1.0);
  for (int i = 0; i < 200; ++i) {
    const SurfacePoint b = random_surface_point(sphere, rng);
    const TangentDirection base{b, sphere.normal(b.face).unitOrthogonal()};
    const SurfacePoint target = random_point_near(sphere, b, 0.3, rng);
    const LogCoordinates lc = log_map(sphere, base, target);
    worst_sphere = std::max(
        worst_sphere, (sphere.position(exp_map(sphere, base, lc.distance, lc.angle)) - sphere.position(target)).norm());
  }
  const double secs = t.seconds();
  return {worst_plane <= 1e-4 && worst_sphere <= 1e-4 && secs < 10.0,
          fmt("max error plane %.2e m, icosphere %.2e m (tol 1e-4), %.2f s (< 10 s)", worst_plane, worst_sphere, secs)};
}

// [2] Shortest paths on the 1280-face icosphere within 2% of great circles, 100 pairs.
Outcome sphere_geodesic_accuracy() {
  const SurfaceMesh sphere = shapes::icosphere(3, 1.0);
  if (sphere.num_faces() != 1280) return {false, "icosphere does not have 1280 faces"};
  std::mt19937 rng(102);
  double worst = 0.0;
  int pairs = 0;
  while (pairs < 100) {
    const SurfacePoint a = random_surface_point(sphere, rng), b = random_surface_point(sphere, rng);
    const double truth = great_circle_distance(sphere.position(a), sphere.position(b), 1.0);
    if (truth < 1e-3) continue;
    ++pairs;
    worst = std::max(worst, std::abs(shortest_geodesic_path(sphere, a, b).length - truth) / truth);
  }
  return {worst <= 0.02, fmt("worst relative error %.2f%% over %d pairs (tol 2%%)", 100 * worst, pairs)};
}

// [3] Self-transfer of a 300-vertex patch; plane -> icosphere near-isometry.
Outcome transfer_identity() {
  const SurfaceMesh sphere = shapes::icosphere(4, 1.0);
  const ContactPatch patch{closest_n(sphere, Vec3(0.3, 0.5, 0.8).normalized(), 300), 0};
  const ContactAxis axis = synthesize_axis(sphere, patch);
  const ParamPatch pp = parameterize_patch(sphere, patch, axis);
  const TransferResult self = transfer_patch(sphere, pp, axis);
  double worst_self = self.failed > 0 ? 1e9 : 0.0;
  for (const Correspondence& c : self.correspondences.pairs)
    worst_self = std::max(worst_self, (sphere.position(c.object_point) - sphere.vertex(c.body_vertex)).norm());

  const SurfaceMesh plane = shapes::plane_grid(20, 2.0);
  std::vector<int> disc;
  for (int v = 0; v < plane.num_vertices(); ++v)
    if ((plane.vertex(v) - Vec3(0.01, 0.02, 0)).norm() <= 0.2) disc.push_back(v);
  const ContactPatch small{disc, 0};
  const ContactAxis paxis = synthesize_axis(plane, small);
  const ParamPatch ppp = parameterize_patch(plane, small, paxis);
  const ContactAxis target = unpack_axis(sphere, paxis, sphere.closest_point(Vec3(0.2, -0.1, 1)).point, Vec3(1, 0.5, 1));
  const TransferResult tr = transfer_patch(sphere, ppp, target);
  std::mt19937 rng(103);
  std::uniform_int_distribution<size_t> pick(0, tr.points.size() - 1);
  double worst_iso = tr.failed > 0 ? 1e9 : 0.0;
  for (int k = 0; k < 200; ++k) {
    const size_t i = pick(rng), j = pick(rng);
    const double src = (plane.vertex(ppp.records[i].vertex) - plane.vertex(ppp.records[j].vertex)).norm();
    if (src < 0.1) continue;
    const double dst = shortest_geodesic_path(sphere, tr.points[i], tr.points[j]).length;
    worst_iso = std::max(worst_iso, std::abs(dst - src) / src);
  }
  return {self.correspondences.pairs.size() == 300 && worst_self <= 1e-4 && worst_iso <= 0.05,
          fmt("self-transfer %zu/300 points, max error %.2e m (tol 1e-4); plane->icosphere pairwise distortion %.2f%% (tol 5%%)",
              self.correspondences.pairs.size(), worst_self, 100 * worst_iso)};
}

// [4] Stage 1 on noise-free correspondences, 100 random trials, < 1 s.
Outcome stage1_recovery() {
  std::mt19937 rng(104);
  std::uniform_real_distribution<double> angle(0.0, kPi * 0.95);
  std::normal_distribution<double> n(0.0, 1.0);
  const SurfaceMesh raw = shapes::box(Vec3::Zero(), Vec3(0.4, 0.25, 0.3), 3);
  const SurfaceMesh object = transformed(raw, Mat3::Identity(), -vertex_centroid(raw));
  double worst_r = 0.0, worst_t = 0.0;
  int ok = 0;
  Timer t;
  for (int trial = 0; trial < 100; ++trial) {
    const Vec3 axis = Vec3(n(rng), n(rng), n(rng)).normalized();
    const RigidPose truth{angle(rng) * axis, 0.5 * Vec3(n(rng), n(rng), n(rng)), 1.0 + 0.3 * (trial % 3)};
    const SurfaceMesh body = transformed(object, truth.matrix(), truth.translation, truth.scale);
    std::vector<int> ids(object.num_vertices());
    std::iota(ids.begin(), ids.end(), 0);
    std::shuffle(ids.begin(), ids.end(), rng);
    CorrespondenceSet s;
    for (int i = 0; i < 10 + trial % 20; ++i) s.pairs.push_back({ids[i], object.vertex_point(ids[i]), 0});
    const RigidPose got = stage1_register(s, body, object, truth.scale);
    const double er = angle_between(got.matrix(), truth.matrix()), et = (got.translation - truth.translation).norm();
    worst_r = std::max(worst_r, er);
    worst_t = std::max(worst_t, et);
    ok += er < 1e-4 && et < 1e-5;
  }
  const double secs = t.seconds();
  return {ok == 100 && secs < 1.0,
          fmt("%d/100 trials, max rotation error %.2e rad (tol 1e-4), max translation error %.2e m (tol 1e-5), %.3f s (< 1 s)",
              ok, worst_r, worst_t, secs)};
}

struct SuiteRun {
  PaChamfer one, two, three;
  double lp_initial = 0.0, lp_final = 0.0;
};

// Fits every seed with 1, 1+2 and 1+2+3 stages.
std::vector<SuiteRun> run_suite(int seeds, double* three_stage_seconds) {
  std::vector<SuiteRun> out;
  *three_stage_seconds = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    const GraspScene s = grasp_scene(seed);
    const SurfaceMesh gh = s.gt_human_mesh(), go = s.gt_object_mesh();
    SuiteRun run;
    for (int stages = 1; stages <= 3; ++stages) {
      FitConfig cfg;
      cfg.stages = stages;
      Timer t;
      const FitResult r = fit(s.inputs(), cfg);
      if (stages == 3) *three_stage_seconds += t.seconds();
      const SurfaceMesh ph = pose_body(*s.body, r.theta), po = posed_object(s.object, r);
      const PaChamfer cd = pa_cd(ph, po, gh, go);
      (stages == 1 ? run.one : stages == 2 ? run.two : run.three) = cd;
      if (stages == 3) {
        run.lp_initial = r.stages[1].initial_penetration;
        // independent recomputation on the final body
        const SdfGrid sdf = build_sdf(ph, cfg.sdf_voxel, cfg.sdf_padding);
        run.lp_final = loss_penetration(sdf, po.vertices(), RigidPose{});
      }
    }
    std::printf("  seed %2d: PA-CD_h %.3f  PA-CD_o %.3f  (h+o: 1-only %.3f, 1+2 %.3f, 1+2+3 %.3f)  L_p %.2e -> %.2e\n",
                seed, run.three.human, run.three.object, run.one.combined, run.two.combined, run.three.combined,
                run.lp_initial, run.lp_final);
    std::fflush(stdout);
    out.push_back(run);
  }
  return out;
}

// [5] 20 seeded grasp scenes: PA-CD_o <= 2 cm, PA-CD_h <= 1 cm, final L_p <= initial, < 5 min.
Outcome end_to_end(const std::vector<SuiteRun>& runs, double seconds) {
  int ok = 0, ok_h = 0, ok_o = 0, ok_p = 0;
  double worst_h = 0.0, worst_o = 0.0;
  for (const SuiteRun& r : runs) {
    const bool h = r.three.human <= 1.0, o = r.three.object <= 2.0, p = r.lp_final <= r.lp_initial + 1e-12;
    ok += h && o && p;
    ok_h += h;
    ok_o += o;
    ok_p += p;
    worst_h = std::max(worst_h, r.three.human);
    worst_o = std::max(worst_o, r.three.object);
  }
  const int n = static_cast<int>(runs.size());
  return {ok == n && seconds < 300.0,
          fmt("%d/%d trials pass (PA-CD_h <= 1 cm: %d, PA-CD_o <= 2 cm: %d, L_p not increased: %d); worst PA-CD_h %.3f cm, "
              "PA-CD_o %.3f cm; 1+2+3 fits took %.1f s (< 300 s)",
              ok, n, ok_h, ok_o, ok_p, worst_h, worst_o, seconds)};
}

// [6] Mean PA-CD_{h+o} over the suite: 1+2+3 <= 1-only and <= 1+2.
Outcome ablation(const std::vector<SuiteRun>& runs) {
  double one = 0, two = 0, three = 0;
  int beats_one = 0, beats_two = 0;
  for (const SuiteRun& r : runs) {
    one += r.one.combined;
    two += r.two.combined;
    three += r.three.combined;
    beats_one += r.three.combined <= r.one.combined;
    beats_two += r.three.combined <= r.two.combined;
  }
  const double n = static_cast<double>(runs.size());
  return {three <= one && three <= two,
          fmt("mean PA-CD_{h+o}: 1-only %.3f, 1+2 %.3f, 1+2+3 %.3f cm; per seed 1+2+3 <= 1-only %d/%d, <= 1+2 %d/%d",
              one / n, two / n, three / n, beats_one, (int)n, beats_two, (int)n)};
}

// [7] Metrics against brute-force reimplementations; PA invariance at 8192 samples.
Outcome metric_oracles() {
  std::mt19937 rng(107);
  double chamfer_err = 0.0, pacd_err = 0.0, icp_res_err = 0.0, icp_rot_err = 0.0, f1_err = 0.0, invariance = 0.0;
  bool contacts_equal = true;

  for (int trial = 0; trial < 10; ++trial) {
    const auto a = random_cloud(rng, 200 + 30 * trial), b = random_cloud(rng, 300 - 10 * trial, 0.8);
    chamfer_err = std::max(chamfer_err, std::abs(chamfer(a, b) - brute_chamfer_cm(a, b)));
  }

  const SurfaceMesh human = shapes::box(Vec3::Zero(), Vec3(0.4, 1.6, 0.3), 6);
  const SurfaceMesh ball = shapes::icosphere(3, 0.15);
  for (int trial = 0; trial < 3; ++trial) {
    const SurfaceMesh gt_o = transformed(ball, Mat3::Identity(), Vec3(0.35, 0, 0));
    const SurfaceMesh pred_h = transformed(human, random_rotation(rng, 0.05), random_cloud(rng, 1, 0.03)[0]);
    const SurfaceMesh pred_o = transformed(gt_o, random_rotation(rng, 0.2), random_cloud(rng, 1, 0.05)[0], 1.1);
    const int n = 1200;
    const PaChamfer r = pa_cd(pred_h, pred_o, human, gt_o, n, trial);
    std::vector<Vec3> ph, gh, po, go;
    for (const auto& s : sample_surface(human, n, trial)) ph.push_back(pred_h.position(s)), gh.push_back(human.position(s));
    for (const auto& s : sample_surface(gt_o, n, trial + 1)) po.push_back(pred_o.position(s)), go.push_back(gt_o.position(s));
    std::vector<Vec3> pa = ph, ga = gh;
    pa.insert(pa.end(), po.begin(), po.end());
    ga.insert(ga.end(), go.begin(), go.end());
    const SimilarityTransform t = umeyama_oracle(pa, ga, true);
    pacd_err = std::max({pacd_err, std::abs(r.human - brute_chamfer_cm(t.apply(ph), gh)),
                         std::abs(r.object - brute_chamfer_cm(t.apply(po), go)),
                         std::abs(r.combined - brute_chamfer_cm(t.apply(pa), ga))});
  }

  for (int trial = 0; trial < 5; ++trial) {
    const auto a = random_cloud(rng, 200, 0.5);
    const Mat3 rr = random_rotation(rng, 0.2);
    std::vector<Vec3> b;
    for (const Vec3& p : random_cloud(rng, 250, 0.5)) b.push_back(rr * p + Vec3(0.02, 0, 0.01));
    const IcpResult got = icp_align(a, b, 30), want = icp_oracle(a, b, 30);
    if (got.residuals.size() != want.residuals.size()) {
      icp_res_err = 1e9;
      continue;
    }
    for (size_t i = 0; i < got.residuals.size(); ++i)
      icp_res_err = std::max(icp_res_err, std::abs(got.residuals[i] - want.residuals[i]));
    icp_rot_err = std::max(icp_rot_err, (got.transform.rotation - want.transform.rotation).norm());
  }

  const SurfaceMesh cube = shapes::box(Vec3::Zero(), Vec3::Ones(), 3);
  const SurfaceMesh small_ball = shapes::icosphere(2, 0.3);
  for (int trial = 0; trial < 6; ++trial) {
    const SurfaceMesh o =
        transformed(small_ball, random_rotation(rng, kPi), Vec3(0.78, 0, 0) + random_cloud(rng, 1, 0.06)[0]);
    const ContactSets s = gt_contact_extract(cube, o);
    const auto [body, object] = contact_oracle(cube, o, 0.05);
    contacts_equal = contacts_equal && s.body == body && s.object == object;
  }

  std::uniform_int_distribution<int> v(0, 99);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<int> a(trial % 30), b((trial * 7) % 30);
    for (int& x : a) x = v(rng);
    for (int& x : b) x = v(rng);
    const F1Score got = contact_f1(a, b), want = f1_oracle(a, b);
    f1_err = std::max({f1_err, std::abs(got.precision - want.precision), std::abs(got.recall - want.recall),
                       std::abs(got.f1 - want.f1)});
  }

  const SurfaceMesh gt_o = transformed(ball, Mat3::Identity(), Vec3(0.35, 0, 0));
  for (int trial = 0; trial < 5; ++trial) {
    const Mat3 r = random_rotation(rng, kPi);
    const Vec3 t = random_cloud(rng, 1, 3.0)[0];
    const double s = 0.5 + 0.4 * trial;
    const PaChamfer g = pa_cd(transformed(human, r, t, s), transformed(gt_o, r, t, s), human, gt_o, 8192, trial);
    invariance = std::max({invariance, g.human, g.object, g.combined});
  }

  const bool pass = chamfer_err <= 1e-9 && pacd_err <= 1e-9 && icp_res_err <= 1e-9 && icp_rot_err <= 1e-6 &&
                    contacts_equal && f1_err <= 1e-9 && invariance <= 0.1;
  return {pass, fmt("chamfer %.1e, pa_cd %.1e, ICP residual %.1e / rotation %.1e, contacts %s, F1 %.1e (tol 1e-9, "
                    "ICP rotation 1e-6); PA invariance %.2e cm at 8192 samples (tol 0.1)",
                    chamfer_err, pacd_err, icp_res_err, icp_rot_err, contacts_equal ? "identical" : "DIFFER", f1_err,
                    invariance)};
}

// [8] nn_objects / nn_contact_annotation vs exhaustive scans on 10^3 records; refine idempotence.
Outcome retrieval_oracles() {
  std::mt19937 rng(108);
  std::normal_distribution<float> g;
  EmbeddingStore store;
  store.dimension = 32;
  for (int i = 0; i < 1000; ++i) {
    EmbeddingRecord r{"obj" + std::to_string(i), {}, "", ""};
    for (int d = 0; d < 32; ++d) r.embedding.push_back(g(rng));
    store.records.push_back(std::move(r));
  }
  int nn_ok = 0;
  for (int q = 0; q < 100; ++q) {
    std::vector<float> query(32);
    for (float& x : query) x = g(rng);
    std::vector<std::pair<long double, std::string>> all;
    for (const auto& r : store.records) {
      long double dot = 0, a = 0, b = 0;
      for (int d = 0; d < 32; ++d) {
        dot += (long double)query[d] * r.embedding[d];
        a += (long double)query[d] * query[d];
        b += (long double)r.embedding[d] * r.embedding[d];
      }
      all.emplace_back(-dot / std::sqrt(a * b), r.id);
    }
    std::sort(all.begin(), all.end());
    const auto got = nn_objects(store, query, 3);
    bool same = got.size() == 3;
    for (int k = 0; same && k < 3; ++k) same = got[k].record->id == all[k].second;
    nn_ok += same;
  }

  ContactAnnotationStore annotations;
  std::uniform_int_distribution<int> vert(0, 999), len(1, 60);
  for (int i = 0; i < 1000; ++i) {
    std::set<int> s;
    const int n = len(rng);
    while ((int)s.size() < n) s.insert(vert(rng));
    annotations.records.push_back({"rec" + std::to_string(i), "", {s.begin(), s.end()}, "obj0", {}, {}, {}, 1.0});
  }
  int iou_ok = 0;
  for (int q = 0; q < 200; ++q) {
    std::set<int> qs;
    const int n = len(rng);
    while ((int)qs.size() < n) qs.insert(vert(rng));
    if (q % 20 == 0) qs = {annotations.records[q].body_contacts.begin(), annotations.records[q].body_contacts.end()};
    double best = -1;
    std::string best_id;
    for (const auto& r : annotations.records) {
      int inter = 0;
      for (int v : r.body_contacts) inter += qs.count(v);
      const double iou = double(inter) / double(qs.size() + r.body_contacts.size() - inter);
      if (iou > best || (iou == best && r.id < best_id)) best = iou, best_id = r.id;
    }
    iou_ok += nn_contact_annotation(annotations, std::vector<int>(qs.begin(), qs.end())).record->id == best_id;
  }

  const BodyModel body = toy_humanoid();
  std::map<std::string, std::vector<int>> parts;
  for (const std::string& p : body.part_names) parts[p] = body.part_vertices(p);
  std::uniform_int_distribution<int> bv(0, body.mesh.num_vertices() - 1), blen(0, 300);
  std::bernoulli_distribution coin(0.25);
  int idem = 0;
  for (int t = 0; t < 100; ++t) {
    std::vector<int> deco(blen(rng));
    for (int& x : deco) x = bv(rng);
    OracleResponse o;
    std::vector<std::string> listed;
    for (const std::string& p : contact_part_vocabulary())
      if (coin(rng)) listed.push_back(p);
    o.parts = listed;
    const auto once = refine_contacts(deco, o, parts);
    idem += refine_contacts(once, o, parts) == once;
  }
  return {nn_ok == 100 && iou_ok == 200 && idem == 100,
          fmt("nn_objects top-3 %d/100 queries, nn_contact_annotation %d/200 queries (1000-record stores); refine_contacts "
              "idempotent %d/100",
              nn_ok, iou_ok, idem)};
}

// [9] Analytic dL_c and dL_p vs central differences at 100 random states.
Outcome gradient_checks() {
  std::mt19937 rng(109);
  const SurfaceMesh ball = shapes::icosphere(3, 0.4);
  const SdfGrid sdf = build_sdf(ball, 0.02, 0.1);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  std::normal_distribution<double> n(0.0, 1.0);
  auto fd = [](auto&& f, const RigidPose& pose) {
    Vec7 g;
    const Vec7 x = pose.to_vector();
    for (int i = 0; i < 7; ++i) {
      Vec7 hi = x, lo = x;
      hi[i] += 1e-5;
      lo[i] -= 1e-5;
      g[i] = (f(RigidPose::from_vector(hi)) - f(RigidPose::from_vector(lo))) / 2e-5;
    }
    return g;
  };
  // L_p is piecewise trilinear: states whose probes sit on a cell face or the
  // zero level have no unique derivative and are redrawn.
  auto smooth_at = [&](const std::vector<Vec3>& object, const RigidPose& pose) {
    for (const Vec3& x : object) {
      const Vec3 q = pose.apply(x);
      if (std::abs(query_sdf(sdf, q)) < 1e-4) return false;
      const Vec3 c = (q - sdf.origin) / sdf.voxel;
      for (int k = 0; k < 3; ++k)
        if (std::abs(c[k] - std::round(c[k])) < 1e-3) return false;
    }
    return true;
  };
  double worst_c = 0.0, worst_p = 0.0;
  int states = 0, redrawn = 0;
  while (states < 100) {
    const RigidPose pose{0.8 * Vec3(n(rng), n(rng), n(rng)), 0.05 * Vec3(n(rng), n(rng), n(rng)),
                         0.8 + 0.4 * (u(rng) + 0.25) * 2.0};
    std::vector<Vec3> body(12), object(12);
    for (int i = 0; i < 12; ++i) {
      object[i] = Vec3(u(rng), u(rng), u(rng));
      body[i] = Vec3(u(rng), u(rng), u(rng));
    }
    if (!smooth_at(object, pose)) {
      ++redrawn;
      continue;
    }
    ++states;
    Vec7 gc, gp;
    contact_loss(body, object, pose, &gc);
    const Vec7 fc = fd([&](const RigidPose& p) { return contact_loss(body, object, p); }, pose);
    loss_penetration(sdf, object, pose, &gp);
    const Vec7 fp = fd([&](const RigidPose& p) { return loss_penetration(sdf, object, p); }, pose);
    worst_c = std::max(worst_c, (gc - fc).norm() / fc.norm());
    worst_p = std::max(worst_p, (gp - fp).norm() / fp.norm());
  }
  return {worst_c <= 1e-3 && worst_p <= 1e-3,
          fmt("max relative error L_c %.2e, L_p %.2e over %d states (tol 1e-3; %d non-differentiable draws skipped)",
              worst_c, worst_p, states, redrawn)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s  %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  };

  report("geodesic round trip", geodesic_round_trip);
  report("sphere geodesic accuracy", sphere_geodesic_accuracy);
  report("self-transfer identity", transfer_identity);
  report("stage-1 exact recovery", stage1_recovery);

  std::vector<SuiteRun> runs;
  double seconds = 0.0;
  std::string suite_error;
  try {
    runs = run_suite(20, &seconds);
  } catch (const std::exception& e) {
    suite_error = e.what();
  }
  report("synthetic end-to-end fit", [&] {
    return suite_error.empty() ? end_to_end(runs, seconds) : Outcome{false, "threw: " + suite_error};
  });
  report("stage ablation direction", [&] {
    return suite_error.empty() ? ablation(runs) : Outcome{false, "threw: " + suite_error};
  });

  report("metric oracles", metric_oracles);
  report("retrieval oracles", retrieval_oracles);
  report("gradient checks", gradient_checks);

  std::printf("%d of 9 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
