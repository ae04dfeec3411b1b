#include "ascr/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "ascr/error.hpp"

namespace ascr {

SensorArray synthetic_array(double spacing) {
  const double h = spacing * std::sqrt(3.0) / 2.0;
  std::vector<Point> p{{-spacing, 0.0}, {0.0, 0.0},         {spacing, 0.0},
                       {-spacing / 2, h}, {spacing / 2, h}, {0.0, 2 * h}};
  const double mean_n = (2 * h + 2 * h) / 6.0;
  for (auto& x : p) x.northing -= mean_n;
  return SensorArray(std::move(p));
}

FunctionCovariates synthetic_covariates() {
  return FunctionCovariates({"depth", "distance_to_coast", "d"}, [](Point x) {
    // coast tilted so distance varies along mesh rows as well as columns
    const double offset = x.northing - (kSyntheticCoastNorthing + kSyntheticCoastSlope * x.easting);
    const double dist = std::max(0.0, offset / std::sqrt(1.0 + kSyntheticCoastSlope * kSyntheticCoastSlope));
    // shelf deepening offshore plus an east-west ridge so depth is not a function of distance alone
    double depth = 0.0;
    if (dist > 0.0) {
      depth = 5.0 + 80.0 * (1.0 - std::exp(-dist / 25000.0)) + 12.0 * (1.0 + std::sin(x.easting / 12000.0));
    }
    return std::vector<double>{depth, dist, dist / kSyntheticCoastScale};
  });
}

MeshSpec synthetic_mesh_spec() { return MeshSpec{10000.0, 5000.0, 60000.0, 10000.0}; }

Mesh synthetic_mesh(const SensorArray& array, const MeshSpec& spec, bool sea_only) {
  const auto cov = synthetic_covariates();
  Mesh full = build_mesh(array, cov, spec);
  if (!sea_only) return full;
  std::vector<MeshCell> cells;
  for (const auto& c : full.cells()) {
    if (c.covariates[0] > 0.0 && c.covariates[1] > 0.0) cells.push_back(c);
  }
  return Mesh(full.covariate_names(), std::move(cells), spec);
}

SourceLevelGrid synthetic_source_level_grid() { return SourceLevelGrid(127.0, 199.0, 3.0); }

ScenarioSpec synthetic_scenario(int which, std::uint64_t seed) {
  ScenarioSpec s;
  s.formula = "D ~ d + d2";
  s.standardize = false;
  s.sim.seed = seed;
  s.sim.options.bearing = BearingModel::mixture;
  ModelParams& t = s.sim.truth;
  t.det = {0.6, 96.0};
  t.bearing.kappa = 0.3;
  t.bearing.psi_kappa = 0.1;
  if (which == 1) {
    s.name = "variable";
    s.sim.options.source_level = SourceLevelMode::variable;
    t.prop = {18.0, 2.7};
    t.sl = {163.0, 5.0, false};
    t.bearing.delta_kappa = 36.7;
    t.beta = {-12.0, 45.0, -53.0};
  } else if (which == 2) {
    s.name = "fixed";
    s.sim.options.source_level = SourceLevelMode::fixed;
    t.prop = {14.5, 4.5};
    t.sl = {155.0, 0.0, true};
    t.bearing.delta_kappa = 34.7;
    t.beta = {-16.0, 57.0, -68.5};
  } else {
    throw ConfigError("scenario must be 1 (variable source level) or 2 (fixed source level)");
  }
  return s;
}

}  // namespace ascr
