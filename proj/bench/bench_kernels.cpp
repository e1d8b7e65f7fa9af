#include <benchmark/benchmark.h>

#include "compdyn/rng.hpp"
#include "compdyn/stats.hpp"
#include "compdyn/tasks.hpp"

using namespace compdyn;

namespace {

// Full networked model from the case-study preset, shortened.
const RunConfig& usecase() {
  static const RunConfig rc = [] {
    auto doc = find_preset("usecase").config;
    apply_overrides(doc, {"solver.t_end=10"});
    return parse_run_config(doc);
  }();
  return rc;
}

const RunConfig& simple() {
  static const RunConfig rc = parse_run_config(find_preset("simple-case").config);
  return rc;
}

BasinSpec small_basin() {
  BasinSpec bs = simple().basin;
  bs.n_P1 = bs.n_P2 = 9;
  return bs;
}

HeatmapSpec small_heatmap() { return {"beta1", 0.5, 6.5, 5, "phi", -1.0, 1.0, 5}; }

struct GlmData {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  GlmFit fit;
};

const GlmData& glm_data() {
  static const GlmData d = [] {
    Rng rng(11);
    const int n = 400;
    GlmData g;
    g.X.resize(n, 4);
    g.y.resize(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < 4; ++j) g.X(i, j) = rng.uniform();
      const double eta = -1.0 + 3.0 * g.X(i, 0) - 2.0 * g.X(i, 1) + 0.5 * g.X(i, 2);
      g.y(i) = 1.0 / (1.0 + std::exp(-eta));
    }
    g.fit = fit_quasibinomial(g.X, g.y);
    return g;
  }();
  return d;
}

const std::vector<double> P0 = {5.0, 5.0, 5.0};

void BM_ensemble_serial(benchmark::State& st) {
  const System sys = make_system(usecase());
  for (auto _ : st) benchmark::DoNotOptimize(ensemble_serial(sys, P0, 8, 1, usecase().scenario));
}
void BM_ensemble(benchmark::State& st) {
  const System sys = make_system(usecase());
  for (auto _ : st)
    benchmark::DoNotOptimize(ensemble(sys, P0, 8, 1, usecase().scenario, {static_cast<int>(st.range(0))}));
}

void BM_basin_serial(benchmark::State& st) {
  const System sys = make_system(simple());
  for (auto _ : st) benchmark::DoNotOptimize(estimate_basin_serial(sys, small_basin()));
}
void BM_basin(benchmark::State& st) {
  const System sys = make_system(simple());
  for (auto _ : st) benchmark::DoNotOptimize(estimate_basin(sys, small_basin(), {static_cast<int>(st.range(0))}));
}

void BM_heatmap_serial(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(
        basin_heatmap_serial(simple().variant, simple().params, nullptr, small_heatmap(), small_basin()));
}
void BM_heatmap(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(basin_heatmap(simple().variant, simple().params, nullptr, small_heatmap(),
                                           small_basin(), {static_cast<int>(st.range(0))}));
}

SweepSpec sweep_spec() {
  SweepSpec s;
  s.param = "beta1";
  s.lo = 1.0;
  s.hi = 4.0;
  s.n_points = 8;
  s.scenario = simple().scenario;
  return s;
}
void BM_sweep_serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(sweep_bifurcation_serial(simple().variant, simple().params, sweep_spec()));
}
void BM_sweep(benchmark::State& st) {
  for (auto _ : st)
    benchmark::DoNotOptimize(
        sweep_bifurcation(simple().variant, simple().params, sweep_spec(), {static_cast<int>(st.range(0))}));
}

void BM_importance_serial(benchmark::State& st) {
  const GlmData& g = glm_data();
  for (auto _ : st) benchmark::DoNotOptimize(permutation_importance_serial(g.fit, g.X, g.y, 20, 3));
}
void BM_importance(benchmark::State& st) {
  const GlmData& g = glm_data();
  for (auto _ : st)
    benchmark::DoNotOptimize(permutation_importance(g.fit, g.X, g.y, 20, 3, {}, {static_cast<int>(st.range(0))}));
}

}  // namespace

BENCHMARK(BM_ensemble_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ensemble)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_basin_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_basin)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_heatmap_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_heatmap)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_sweep)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_importance_serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_importance)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
