#include "ascr/simulation.hpp"

#include <cmath>
#include <limits>

#include "ascr/error.hpp"
#include "ascr/rng.hpp"

namespace ascr {

Simulation simulate(const SurveyGeometry& geom, const DesignMatrix& design, const SimConfig& config) {
  const ModelParams& t = config.truth;
  if (t.det.g0 < 0.0 || t.det.g0 > 1.0) throw ConfigError("g0 must lie in [0, 1]");
  if (!(t.prop.sigma_r > 0.0)) throw ConfigError("sigma_r must be positive");
  const bool fixed_sl = config.options.source_level == SourceLevelMode::fixed;
  if (!fixed_sl && !(t.sl.sigma_s > 0.0)) throw ConfigError("sigma_s must be positive");

  Rng rng(config.seed);
  const auto eta = log_density(t.beta, design);
  const Mesh& mesh = geom.mesh();
  const std::size_t k = geom.sensors();

  Simulation sim;
  sim.data.sensors = k;
  sim.data.m_min = config.m_min;
  sim.data.period = config.period;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<std::uint8_t> w(k);
  std::vector<double> y(k), r(k);

  for (std::size_t m = 0; m < mesh.size(); ++m) {
    const double mean = config.period * std::exp(geom.log_area(m) + eta[m]);
    sim.expected_emitted += mean;
    const std::uint64_t count = rng.poisson(mean);
    sim.emitted += count;
    const double side = std::sqrt(mesh[m].area);
    for (std::uint64_t c = 0; c < count; ++c) {
      Point x = mesh[m].centroid;
      if (config.uniform_within_cell) {
        x.easting += (rng.uniform() - 0.5) * side;
        x.northing += (rng.uniform() - 0.5) * side;
      }
      const double s = fixed_sl ? t.sl.mu_s : rng.truncated_normal_above(t.sl.mu_s, t.sl.sigma_s, 0.0);
      int detections = 0;
      for (std::size_t j = 0; j < k; ++j) {
        const double level = expected_received_level(s, geom.array().distance(j, x), t.prop) + t.prop.sigma_r * rng.normal();
        const bool heard = level >= t.det.t_r && rng.uniform() < t.det.g0;
        w[j] = heard ? 1 : 0;
        y[j] = nan;
        r[j] = nan;
        if (!heard) continue;
        ++detections;
        r[j] = level;
        // component draw happens for every bearing model so streams stay aligned
        const bool low = rng.uniform() < t.bearing.psi_kappa;
        double kappa = t.bearing.kappa;
        if (config.options.bearing == BearingModel::mixture && !low) kappa += t.bearing.delta_kappa;
        y[j] = rng.von_mises(bearing_between(geom.array()[j], x), kappa);
      }
      if (detections < config.m_min) continue;
      sim.data.add_call(w, y, r);
      sim.latent.push_back({m, x, s});
    }
  }
  return sim;
}

std::string to_string(AnalysisModel model) {
  switch (model) {
    case AnalysisModel::a:
      return "a";
    case AnalysisModel::b:
      return "b";
    case AnalysisModel::c:
      return "c";
    case AnalysisModel::d:
      return "d";
    case AnalysisModel::e:
      return "e";
  }
  return {};
}

AnalysisModel parse_analysis_model(const std::string& text) {
  if (text == "a") return AnalysisModel::a;
  if (text == "b") return AnalysisModel::b;
  if (text == "c") return AnalysisModel::c;
  if (text == "d") return AnalysisModel::d;
  if (text == "e") return AnalysisModel::e;
  throw ConfigError("unknown analysis model '" + text + "' (expected a-e)");
}

ModelOptions analysis_options(AnalysisModel model, const ModelOptions& truth_options) {
  ModelOptions o = truth_options;
  o.detection = DetectionModel::threshold;
  switch (model) {
    case AnalysisModel::a:
    case AnalysisModel::e:
      break;
    case AnalysisModel::b:
      o.source_level =
          truth_options.source_level == SourceLevelMode::variable ? SourceLevelMode::fixed : SourceLevelMode::variable;
      break;
    case AnalysisModel::c:
      o.bearing = BearingModel::single;
      break;
    case AnalysisModel::d:
      o.bearing = BearingModel::none;
      break;
  }
  return o;
}

void summarize_cell(ScenarioCell& cell) {
  cell.relative_errors.clear();
  cell.non_converged = 0;
  double sum = 0.0;
  std::vector<double> ok;
  for (std::size_t r = 0; r < cell.estimates.size(); ++r) {
    if (!cell.converged[r] || !std::isfinite(cell.estimates[r])) {
      ++cell.non_converged;
      continue;
    }
    ok.push_back(cell.estimates[r]);
    cell.relative_errors.push_back((cell.estimates[r] - cell.true_abundance) / cell.true_abundance);
    sum += cell.estimates[r];
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (ok.empty()) {
    cell.relative_bias = cell.cv = nan;
    return;
  }
  const double mean = sum / static_cast<double>(ok.size());
  double rb = 0.0;
  for (double e : cell.relative_errors) rb += e;
  cell.relative_bias = rb / static_cast<double>(ok.size());
  if (ok.size() < 2) {
    cell.cv = nan;
    return;
  }
  double ss = 0.0;
  for (double v : ok) ss += (v - mean) * (v - mean);
  cell.cv = std::sqrt(ss / static_cast<double>(ok.size() - 1)) / mean;
}

std::vector<ScenarioCell> run_scenario(const SurveyGeometry& geom, const SourceLevelGrid& grid,
                                       const ScenarioSpec& spec, const std::vector<AnalysisModel>& models,
                                       int replicates, const FitConfig& fit_config) {
  if (replicates < 1) throw ConfigError("scenario runs need at least one replicate");
  const ModelFormula truth_formula = parse_formula(spec.formula, geom.mesh().covariate_names());
  const DesignMatrix truth_design = build_design_matrix(truth_formula, geom.mesh(), spec.standardize);
  const ModelFormula flat = parse_formula("D ~ 1", geom.mesh().covariate_names());

  std::vector<ScenarioCell> cells(models.size());
  const double true_n =
      spec.sim.period * total_abundance(spec.sim.truth.beta, truth_design, geom.mesh(), geom.area_unit_m2());
  for (std::size_t c = 0; c < models.size(); ++c) {
    cells[c].scenario = spec.name;
    cells[c].model = models[c];
    cells[c].true_abundance = true_n;
  }

  for (int rep = 0; rep < replicates; ++rep) {
    SimConfig sc = spec.sim;
    sc.seed = stream_seed(spec.sim.seed, static_cast<std::uint64_t>(rep));
    const Simulation sim = simulate(geom, truth_design, sc);
    for (std::size_t c = 0; c < models.size(); ++c) {
      ScenarioCell& cell = cells[c];
      cell.mean_detected += static_cast<double>(sim.data.size()) / replicates;
      FitConfig cfg = fit_config;
      cfg.options = analysis_options(models[c], spec.sim.options);
      cfg.standardize = spec.standardize;
      cfg.t_r = spec.sim.truth.det.t_r;
      ModelParams start = spec.sim.truth;
      start.sl.fixed = cfg.options.source_level == SourceLevelMode::fixed;
      if (!start.sl.fixed && !(start.sl.sigma_s > 0.0)) start.sl.sigma_s = 5.0;
      if (cfg.options.bearing != BearingModel::mixture) start.bearing.delta_kappa = 0.0;
      const ModelFormula& formula = models[c] == AnalysisModel::e ? flat : truth_formula;
      if (models[c] == AnalysisModel::e) {
        start.beta = {0.0};
        cfg.match_intercept = true;
      }
      cfg.start = start;
      try {
        const FitResult r = fit(geom, grid, sim.data, formula, cfg);
        cell.estimates.push_back(r.abundance);
        cell.converged.push_back(r.converged);
        cell.fitted.push_back(r.params);
      } catch (const std::exception&) {
        cell.estimates.push_back(std::numeric_limits<double>::quiet_NaN());
        cell.converged.push_back(false);
        cell.fitted.push_back(start);
      }
    }
  }
  for (auto& cell : cells) summarize_cell(cell);
  return cells;
}

}  // namespace ascr
