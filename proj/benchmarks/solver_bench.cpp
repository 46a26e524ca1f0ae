#include <benchmark/benchmark.h>

#include <random>

#include "satcm/interval_stabbing.hpp"
#include "satcm/rotation_solver.hpp"
#include "satcm/synth.hpp"

namespace {

using namespace satcm;

std::vector<TaggedInterval> random_intervals(int n_samples, int total,
                                             std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, M_PI);
  std::uniform_int_distribution<int> usample(0, n_samples - 1);
  std::vector<TaggedInterval> out;
  for (int i = 0; i < total; ++i) {
    double a = uni(rng), b = uni(rng);
    if (a > b) std::swap(a, b);
    out.push_back({a, b, usample(rng)});
  }
  return out;
}

void BM_SatStab(benchmark::State& state) {
  const int n_samples = 16;
  const int total = static_cast<int>(state.range(0));
  const auto intervals = random_intervals(n_samples, total, 1);
  std::vector<int> m(n_samples, 0);
  for (const auto& iv : intervals) m[iv.sample] += 1;
  const SaturationSpec spec{SaturationKind::likelihood, 0.9, 0.015, 1.0};
  const WeightTable weights(spec, m);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sat_stab(intervals, weights).value);
  }
  state.SetComplexityN(total);
}
BENCHMARK(BM_SatStab)->Range(64, 4096)->Complexity(benchmark::oNLogN);

std::vector<Association> scene_associations(const SyntheticScene& scene) {
  const AssociationSet assoc = associate(scene.query, scene.map_lines);
  std::vector<Association> out;
  for (std::size_t k = 0; k < assoc.query_indices.size(); ++k) {
    const Line2D& line = scene.query[assoc.query_indices[k]];
    for (int m : assoc.candidates[k]) {
      out.emplace_back(static_cast<int>(k), m, line.normal,
                       scene.map_lines[m].direction);
    }
  }
  return out;
}

void BM_RotationBoundPair(benchmark::State& state) {
  SceneSpec spec;
  spec.seed = 3;
  spec.n_map_lines = static_cast<int>(state.range(0));
  spec.n_query = 12;
  const SyntheticScene scene = synth_scene(spec);
  const auto assoc = scene_associations(scene);
  const SaturationSpec sat{SaturationKind::likelihood, 0.9, 0.015, 1.0};
  const WeightTable weights = make_weight_table(assoc, sat);
  const AxisCube cube{0.3, 0.3 + M_PI / 8, 0.9, 0.9 + M_PI / 8};
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        rotation_lower_bound(cube, assoc, weights, 0.015).first);
    benchmark::DoNotOptimize(rotation_upper_bound(cube, assoc, weights, 0.015));
  }
}
BENCHMARK(BM_RotationBoundPair)->Arg(100)->Arg(400);

void BM_SolveRotation(benchmark::State& state) {
  SceneSpec spec;
  spec.seed = 4;
  spec.n_map_lines = static_cast<int>(state.range(0));
  spec.n_query = 10;
  spec.dictionary_size = 6;
  const SyntheticScene scene = synth_scene(spec);
  const auto assoc = scene_associations(scene);
  const SaturationSpec sat{SaturationKind::likelihood, 0.9, 0.015, 1.0};
  RotationConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_rotation(assoc, sat, config).value);
  }
}
BENCHMARK(BM_SolveRotation)->Arg(60)->Arg(150)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
