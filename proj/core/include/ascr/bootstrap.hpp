#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ascr/fit.hpp"

namespace ascr {

struct BootstrapReplicate {
  std::vector<std::size_t> rows;      // resampled call indices
  std::vector<double> link_estimates;
  std::vector<double> real_estimates;
  double abundance = 0.0;
  std::vector<double> density;        // per mesh cell
  bool converged = false;
};

/// Call indices drawn with replacement for replicate `index`.
std::vector<std::size_t> resample_rows(std::size_t n, std::uint64_t seed, std::uint64_t index);

/// Refits B resampled datasets. Each replicate starts at the base estimate
/// unless `start_at_base` is false.
std::vector<BootstrapReplicate> bootstrap(const SurveyGeometry& geom, const SourceLevelGrid& grid,
                                          const Dataset& data, const ModelFormula& formula, const FitConfig& config,
                                          const FitResult& base, int replicates, std::uint64_t seed,
                                          bool start_at_base = true);

struct ParamSummary {
  std::string name;
  double estimate = 0.0;        // real scale, base fit
  double link_estimate = 0.0;
  double se = 0.0;              // real scale
  double cv_percent = 0.0;
  double lower = 0.0;           // 2.5% percentile, real scale
  double upper = 0.0;           // 97.5% percentile, real scale
  double link_se = 0.0;
  double link_lower = 0.0;
  double link_upper = 0.0;
};

struct BootstrapSummary {
  std::vector<ParamSummary> params;  // model parameters followed by "N"
  std::vector<double> qcd;           // per mesh cell
  int converged = 0;
  int non_converged = 0;
};

/// Sample standard deviation (n - 1 divisor); NaN for fewer than two values.
double sample_sd(std::span<const double> values);
/// Nearest-rank percentile: the ceil(p * n)-th smallest value (1-based), p in (0, 1].
double percentile_nearest_rank(std::span<const double> values, double p);
/// (Q3 - Q1) / (Q3 + Q1) with nearest-rank quartiles; 0 when both quartiles are 0.
double quartile_coefficient_of_dispersion(std::span<const double> values);

/// SE, CV, percentile intervals and per-cell QCD over converged replicates.
/// Throws NumericalError when no replicate converged.
BootstrapSummary summarize(const FitResult& base, std::span<const BootstrapReplicate> replicates);

}  // namespace ascr
