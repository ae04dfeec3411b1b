// Likelihood evaluation cost on the synthetic survey.
//
//   Full*    : every parameter changes, so detection terms are rebuilt
//   Density* : only density coefficients change, the cached terms are reused

#include <benchmark/benchmark.h>

#include "ascr/fit.hpp"
#include "ascr/snr.hpp"
#include "ascr/synthetic.hpp"

using namespace ascr;

namespace {

struct Setup {
  SensorArray array = synthetic_array();
  SurveyGeometry geom{array, synthetic_mesh(array, synthetic_mesh_spec()), kHectare};
  SourceLevelGrid grid = synthetic_source_level_grid();
  ScenarioSpec spec;
  DesignMatrix design;
  Dataset data;

  explicit Setup(int which)
      : spec(synthetic_scenario(which, 1)),
        design(build_design_matrix(parse_formula(spec.formula, geom.mesh().covariate_names()), geom.mesh(), false)),
        data(simulate(geom, design, spec.sim).data) {}
};

const Setup& setup(int which) {
  static const Setup one(1), two(2);
  return which == 1 ? one : two;
}

void Full(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  const Likelihood lik(s.geom, s.design, s.grid, s.data, s.spec.sim.options);
  ModelParams p = s.spec.sim.truth;
  double sign = 1.0;
  for (auto _ : state) {
    sign = -sign;
    p.prop.beta_r = s.spec.sim.truth.prop.beta_r + 1e-6 * sign;
    benchmark::DoNotOptimize(lik.evaluate(p));
  }
  state.counters["calls"] = static_cast<double>(s.data.size());
}

void Density(benchmark::State& state) {
  const Setup& s = setup(static_cast<int>(state.range(0)));
  const Likelihood lik(s.geom, s.design, s.grid, s.data, s.spec.sim.options);
  ModelParams p = s.spec.sim.truth;
  double sign = 1.0;
  for (auto _ : state) {
    sign = -sign;
    p.beta[1] = s.spec.sim.truth.beta[1] + 1e-6 * sign;
    benchmark::DoNotOptimize(lik.evaluate(p));
  }
  state.counters["calls"] = static_cast<double>(s.data.size());
}

void Snr(benchmark::State& state) {
  const Setup& s = setup(2);
  Dataset data = s.data;
  data.noise.assign(data.omega.size(), s.spec.sim.truth.det.t_r - 2.0);
  const NoiseSample noise{s.geom.sensors(), std::vector<double>(s.geom.sensors(), s.spec.sim.truth.det.t_r - 2.0)};
  const SnrLikelihood lik(s.geom, s.design, s.grid, data, noise, s.spec.sim.options);
  ModelParams p = s.spec.sim.truth;
  p.jan = {p.det.g0, 0.5, 2.0};
  for (auto _ : state) benchmark::DoNotOptimize(lik.evaluate(p));
}

void FitScenario2(benchmark::State& state) {
  const Setup& s = setup(2);
  FitConfig cfg;
  cfg.options = s.spec.sim.options;
  cfg.standardize = false;
  cfg.t_r = s.spec.sim.truth.det.t_r;
  cfg.start = s.spec.sim.truth;
  const auto formula = parse_formula(s.spec.formula, s.geom.mesh().covariate_names());
  for (auto _ : state) benchmark::DoNotOptimize(fit(s.geom, s.grid, s.data, formula, cfg));
}

}  // namespace

// argument: scenario (1 variable source level, 2 fixed)
BENCHMARK(Full)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);
BENCHMARK(Density)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);
BENCHMARK(Snr)->Unit(benchmark::kMillisecond);
BENCHMARK(FitScenario2)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_MAIN();
