#include "ascr/fit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

#include "ascr/error.hpp"
#include "ascr/numerics.hpp"
#include "ascr/rng.hpp"

namespace ascr {

namespace {

double median(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  return 0.5 * (*std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid)) + hi);
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

double aic(int k, double loglik) { return 2.0 * k - 2.0 * loglik; }

double aic(const FitResult& fit) { return aic(fit.k, fit.loglik); }

ModelParams default_start(const LikelihoodModel& model, double t_r) {
  ModelParams p;
  p.det = {0.5, t_r};
  p.prop = {15.0, 3.0};
  p.bearing = {1.0, 20.0, 0.1};
  const ModelOptions& opt = model.options();
  if (opt.bearing != BearingModel::mixture) p.bearing.delta_kappa = 0.0;

  const Dataset& data = model.data();
  std::vector<double> levels;
  for (std::size_t q = 0; q < data.omega.size(); ++q) {
    if (data.omega[q]) levels.push_back(data.received[q]);
  }
  const auto& array = model.geometry().array();
  std::vector<double> spacing;
  for (std::size_t a = 0; a < array.size(); ++a) {
    for (std::size_t b = a + 1; b < array.size(); ++b) spacing.push_back(array.distance(a, array[b]));
  }
  const double med_level = levels.empty() ? t_r + 10.0 : median(levels);
  const double med_spacing = spacing.empty() ? 1000.0 : median(spacing);
  p.sl.mu_s = med_level + p.prop.beta_r * std::log10(med_spacing);
  p.sl.sigma_s = 5.0;
  p.sl.fixed = opt.source_level == SourceLevelMode::fixed;

  p.beta.assign(model.design().cols(), 0.0);
  const double lambda0 = model.evaluate(p).lambda;
  const double n = std::max<double>(1.0, static_cast<double>(data.size()));
  if (lambda0 > 0.0 && std::isfinite(lambda0)) p.beta[0] = std::log(n / lambda0);
  return p;
}

FitResult fit_model(const LikelihoodModel& model, const std::string& formula_text, const FitConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const ParamLayout layout(model.options(), model.design().column_names());
  ModelParams start = config.start ? *config.start : default_start(model, config.t_r);
  start.det.t_r = config.t_r;
  start.sl.fixed = model.options().source_level == SourceLevelMode::fixed;
  if (start.beta.size() != model.design().cols()) {
    throw ConfigError("start values have " + std::to_string(start.beta.size()) + " density coefficients, model has " +
                      std::to_string(model.design().cols()));
  }

  // validates data against the threshold once, outside the objective
  const double lambda_start = model.evaluate(start).lambda;
  if (config.start && config.match_intercept && lambda_start > 0.0) {
    const double n = std::max<double>(1.0, static_cast<double>(model.data().size()));
    start.beta[0] += std::log(n / lambda_start);
  }

  const Objective objective = [&](std::span<const double> theta) {
    try {
      const ModelParams p = layout.untransform(theta, start);
      const double v = model.evaluate(p).full;
      return std::isfinite(v) ? -v : std::numeric_limits<double>::infinity();
    } catch (const ConfigError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  OptimizerOptions opt;
  opt.max_iterations = config.max_iterations;
  opt.rel_tol = config.rel_tol;
  opt.grad_tol = config.grad_tol;

  const std::vector<double> theta0 = layout.transform(start);
  OptimizerResult best = minimize_bfgs(objective, theta0, opt);
  int total_evals = best.evaluations;
  for (int s = 0; s < config.multistart; ++s) {
    Rng rng(stream_seed(config.seed, static_cast<std::uint64_t>(s)));
    std::vector<double> jittered = theta0;
    for (double& v : jittered) v += config.jitter_sd * rng.normal();
    try {
      OptimizerResult r = minimize_bfgs(objective, jittered, opt);
      total_evals += r.evaluations;
      const bool better = (r.converged && !best.converged) || (r.converged == best.converged && r.value < best.value);
      if (better) best = std::move(r);
    } catch (const NumericalError&) {
      // infeasible jittered start
    }
  }

  FitResult out;
  out.formula = formula_text;
  out.options = model.options();
  for (const auto& info : layout.params()) {
    out.names.push_back(info.name);
    out.links.push_back(info.link);
  }
  out.link_estimates = best.x;
  out.params = layout.untransform(best.x, start);
  out.real_estimates = layout.real_values(out.params);
  out.beta_names = model.design().column_names();
  out.beta_original = model.design().to_original_scale(out.params.beta);
  out.log_density = log_density(out.params.beta, model.design());
  const LikelihoodValue v = model.evaluate(out.params);
  out.loglik = v.full;
  out.lambda = v.lambda;
  out.k = static_cast<int>(layout.size());
  out.aic = aic(out.k, out.loglik);
  const auto& geom = model.geometry();
  out.abundance = model.data().period * total_abundance(out.log_density, geom.mesh(), geom.area_unit_m2());
  out.expected_singletons = model.expected_singletons(out.params);
  out.converged = best.converged;
  out.iterations = best.iterations;
  out.evaluations = total_evals;
  out.message = best.message;
  out.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return out;
}

FitResult fit(const SurveyGeometry& geom, const SourceLevelGrid& grid, const Dataset& data,
              const ModelFormula& formula, const FitConfig& config) {
  if (config.options.detection != DetectionModel::threshold) {
    throw ConfigError("fit() covers the threshold detection model; use the SNR likelihood for SNR fits");
  }
  data.validate(config.t_r);
  const DesignMatrix design = build_design_matrix(formula, geom.mesh(), config.standardize);
  const Likelihood model(geom, design, grid, data, config.options, config.threads);
  return fit_model(model, to_string(formula), config);
}

std::vector<SelectionRow> model_select(const SurveyGeometry& geom, const SourceLevelGrid& grid, const Dataset& data,
                                       const std::vector<std::string>& candidates, const FitConfig& config) {
  if (candidates.empty()) throw ConfigError("model selection needs at least one candidate formula");
  std::vector<SelectionRow> rows;
  rows.reserve(candidates.size());
  for (const auto& text : candidates) {
    SelectionRow row;
    row.formula = text;
    try {
      const ModelFormula formula = parse_formula(text, geom.mesh().covariate_names());
      FitConfig cfg = config;
      cfg.start.reset();
      const FitResult r = fit(geom, grid, data, formula, cfg);
      row.formula = r.formula;
      row.k = r.k;
      row.loglik = r.loglik;
      row.aic = r.aic;
      row.abundance = r.abundance;
      row.converged = r.converged && std::isfinite(r.aic);
      row.message = r.message;
    } catch (const std::exception& e) {
      row.converged = false;
      row.loglik = row.aic = row.abundance = std::numeric_limits<double>::quiet_NaN();
      row.message = e.what();
    }
    rows.push_back(std::move(row));
  }
  std::stable_sort(rows.begin(), rows.end(), [](const SelectionRow& a, const SelectionRow& b) {
    if (a.converged != b.converged) return a.converged;
    if (!a.converged) return false;
    return a.aic < b.aic;
  });
  const double best = rows.front().converged ? rows.front().aic : std::numeric_limits<double>::quiet_NaN();
  int rank = 0;
  for (auto& row : rows) {
    if (row.converged) {
      row.rank = ++rank;
      row.delta_aic = row.aic - best;
    } else {
      row.rank = 0;
      row.delta_aic = std::numeric_limits<double>::quiet_NaN();
    }
  }
  return rows;
}

std::vector<std::string> read_formula_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open formula list '" + path + "'");
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto d = line.find('D');
    if (d != std::string::npos && d > 0) {
      const std::string label = trim(line.substr(0, d));
      const bool numbered = !label.empty() && std::all_of(label.begin(), label.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c)) || c == ':' || c == '.' || c == ')';
      });
      if (numbered) line = line.substr(d);
    }
    out.push_back(line);
  }
  return out;
}

}  // namespace ascr
