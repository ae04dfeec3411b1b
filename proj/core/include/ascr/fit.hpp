#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ascr/formula.hpp"
#include "ascr/likelihood.hpp"
#include "ascr/optimizer.hpp"
#include "ascr/params.hpp"

namespace ascr {

struct FitConfig {
  ModelOptions options;
  bool standardize = true;
  double t_r = 96.0;
  int max_iterations = 200;
  double rel_tol = 1e-8;
  double grad_tol = 1e-4;
  /// Real-scale start values; density coefficients on the design-matrix scale.
  /// Default starts are used when absent.
  std::optional<ModelParams> start;
  /// Reset the start intercept so the expected detected count equals n.
  bool match_intercept = false;
  /// Extra starts with jittered link-scale values; the best optimum is kept.
  int multistart = 0;
  double jitter_sd = 0.5;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct FitResult {
  std::string formula;
  ModelOptions options;
  std::vector<std::string> names;
  std::vector<Link> links;
  std::vector<double> link_estimates;
  std::vector<double> real_estimates;
  ModelParams params;                   // estimates on the real scale
  std::vector<std::string> beta_names;
  std::vector<double> beta_original;    // density coefficients on the unstandardized covariate scale
  std::vector<double> log_density;      // per mesh cell at the estimate
  double loglik = 0.0;
  int k = 0;
  double aic = 0.0;
  double abundance = 0.0;   // expected emitted calls over the mesh and period
  double lambda = 0.0;      // expected multiply-detected calls
  double expected_singletons = 0.0;
  bool converged = false;
  int iterations = 0;
  int evaluations = 0;
  double runtime_seconds = 0.0;
  std::string message;
};

/// 2k - 2 log L.
double aic(int k, double loglik);
double aic(const FitResult& fit);

/// Default starts: g0 0.5, beta_r 15, sigma_r 3, mu_s from the median observed
/// level and median sensor spacing, sigma_s 5, kappa 1, delta_kappa 20,
/// psi_kappa 0.1, density intercept matching the observed call count.
ModelParams default_start(const LikelihoodModel& model, double t_r);

/// Maximizes the full log-likelihood of `model` over the free parameters of
/// its options. Non-convergence is reported in the result, not thrown.
FitResult fit_model(const LikelihoodModel& model, const std::string& formula_text, const FitConfig& config);

/// Builds the design matrix for `formula` and fits the threshold-detection likelihood.
FitResult fit(const SurveyGeometry& geom, const SourceLevelGrid& grid, const Dataset& data,
              const ModelFormula& formula, const FitConfig& config);

struct SelectionRow {
  std::string formula;
  int k = 0;
  double loglik = 0.0;
  double aic = 0.0;
  double delta_aic = 0.0;
  double abundance = 0.0;
  bool converged = false;
  int rank = 0;  // 1-based among converged fits; 0 when excluded
  std::string message;
};

/// Fits every candidate, ranks converged fits by AIC, and lists
/// non-converged or failed fits after them with rank 0.
std::vector<SelectionRow> model_select(const SurveyGeometry& geom, const SourceLevelGrid& grid, const Dataset& data,
                                       const std::vector<std::string>& candidates, const FitConfig& config);

/// Reads a candidate list: one formula per line; blank lines and lines
/// starting with '#' are skipped; an optional leading "<number>:" label is dropped.
std::vector<std::string> read_formula_list(const std::string& path);

}  // namespace ascr
