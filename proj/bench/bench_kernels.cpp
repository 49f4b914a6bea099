#include "pico/body/body_model.hpp"
#include "pico/body/sdf.hpp"
#include "pico/contact/transfer.hpp"
#include "pico/eval/metrics.hpp"
#include "pico/mesh/shapes.hpp"
#include "pico/synth/scenes.hpp"

#include <benchmark/benchmark.h>

using namespace pico;

namespace {

std::vector<Vec3> random_points(int n, double r, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Vec3> out;
  for (int i = 0; i < n; ++i) out.push_back(r * uniform01(rng) * random_unit(rng));
  return out;
}

const SurfaceMesh& sphere() {
  static const SurfaceMesh m = shapes::icosphere(4, 1.0);
  return m;
}

const SurfaceMesh& body() {
  static const SurfaceMesh m = toy_humanoid().mesh;
  return m;
}

struct TransferCase {
  SurfaceMesh target;
  ParamPatch param;
  ContactAxis axis;
};

const TransferCase& transfer_case() {
  static const TransferCase c = [] {
    const SurfaceMesh plane = shapes::plane_grid(60, 1.0);
    std::vector<int> verts;
    for (int v = 0; v < plane.num_vertices(); ++v)
      if (plane.vertex(v).head<2>().norm() < 0.15) verts.push_back(v);
    const ContactPatch patch = extract_patches(plane, verts).front();
    const ContactAxis axis = synthesize_axis(plane, patch);
    TransferCase out{shapes::icosphere(4, 0.5), parameterize_patch(plane, patch, axis), {}};
    const SurfacePoint start = out.target.closest_point(Vec3(0, 0, 1)).point;
    out.axis = unpack_axis(out.target, axis, start, Vec3(1, 0, 1) * 0.5);
    return out;
  }();
  return c;
}

void BM_closest_points(benchmark::State& st) {
  const auto q = random_points(static_cast<int>(st.range(0)), 1.5, 1);
  for (auto _ : st) benchmark::DoNotOptimize(closest_points(sphere(), q));
}
void BM_closest_points_reference(benchmark::State& st) {
  const auto q = random_points(static_cast<int>(st.range(0)), 1.5, 1);
  for (auto _ : st) benchmark::DoNotOptimize(reference::closest_points(sphere(), q));
}

void BM_build_sdf(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(build_sdf(body(), 0.02));
}
void BM_build_sdf_reference(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::build_sdf(body(), 0.02));
}

void BM_transfer_patch(benchmark::State& st) {
  const TransferCase& c = transfer_case();
  for (auto _ : st) benchmark::DoNotOptimize(transfer_patch(c.target, c.param, c.axis));
  st.counters["vertices"] = static_cast<double>(c.param.records.size());
}
void BM_transfer_patch_reference(benchmark::State& st) {
  const TransferCase& c = transfer_case();
  for (auto _ : st) benchmark::DoNotOptimize(reference::transfer_patch(c.target, c.param, c.axis));
  st.counters["vertices"] = static_cast<double>(c.param.records.size());
}

void BM_chamfer(benchmark::State& st) {
  const auto a = random_points(static_cast<int>(st.range(0)), 1.0, 2);
  const auto b = random_points(static_cast<int>(st.range(0)), 1.0, 3);
  for (auto _ : st) benchmark::DoNotOptimize(chamfer(a, b));
}
void BM_chamfer_reference(benchmark::State& st) {
  const auto a = random_points(static_cast<int>(st.range(0)), 1.0, 2);
  const auto b = random_points(static_cast<int>(st.range(0)), 1.0, 3);
  for (auto _ : st) benchmark::DoNotOptimize(reference::chamfer(a, b));
}

}  // namespace

BENCHMARK(BM_closest_points)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_closest_points_reference)->Arg(1000)->Arg(10000)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_build_sdf)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_build_sdf_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transfer_patch)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_transfer_patch_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_chamfer)->Arg(2000)->Arg(8192)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_chamfer_reference)->Arg(2000)->Arg(8192)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
