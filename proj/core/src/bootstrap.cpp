#include "ascr/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ascr/error.hpp"
#include "ascr/rng.hpp"

namespace ascr {

std::vector<std::size_t> resample_rows(std::size_t n, std::uint64_t seed, std::uint64_t index) {
  Rng rng(stream_seed(seed, index));
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = static_cast<std::size_t>(rng.uniform_index(n));
  return rows;
}

std::vector<BootstrapReplicate> bootstrap(const SurveyGeometry& geom, const SourceLevelGrid& grid,
                                          const Dataset& data, const ModelFormula& formula, const FitConfig& config,
                                          const FitResult& base, int replicates, std::uint64_t seed,
                                          bool start_at_base) {
  if (replicates < 1) throw ConfigError("bootstrap needs at least one replicate");
  if (data.size() == 0) throw DataError("bootstrap needs at least one call");
  std::vector<BootstrapReplicate> out(static_cast<std::size_t>(replicates));
  FitConfig cfg = config;
  if (start_at_base) {
    cfg.start = base.params;
  } else {
    cfg.start.reset();
  }
  cfg.multistart = 0;
  for (int b = 0; b < replicates; ++b) {
    BootstrapReplicate& rep = out[static_cast<std::size_t>(b)];
    rep.rows = resample_rows(data.size(), seed, static_cast<std::uint64_t>(b));
    const Dataset resampled = data.subset(rep.rows);
    try {
      const FitResult r = fit(geom, grid, resampled, formula, cfg);
      rep.link_estimates = r.link_estimates;
      rep.real_estimates = r.real_estimates;
      rep.abundance = r.abundance;
      rep.density.resize(r.log_density.size());
      std::transform(r.log_density.begin(), r.log_density.end(), rep.density.begin(),
                     [](double v) { return std::exp(v); });
      rep.converged = r.converged;
    } catch (const NumericalError&) {
      rep.converged = false;
    }
  }
  return out;
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double percentile_nearest_rank(std::span<const double> values, double p) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("percentile level must lie in (0, 1]");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  // small tolerance so p * n landing on an integer is not pushed up by rounding
  auto rank = static_cast<std::size_t>(std::ceil(p * static_cast<double>(sorted.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double quartile_coefficient_of_dispersion(std::span<const double> values) {
  const double q1 = percentile_nearest_rank(values, 0.25);
  const double q3 = percentile_nearest_rank(values, 0.75);
  if (q3 + q1 == 0.0) return 0.0;
  return (q3 - q1) / (q3 + q1);
}

BootstrapSummary summarize(const FitResult& base, std::span<const BootstrapReplicate> replicates) {
  BootstrapSummary s;
  std::vector<const BootstrapReplicate*> ok;
  for (const auto& r : replicates) {
    if (r.converged) {
      ok.push_back(&r);
    } else {
      ++s.non_converged;
    }
  }
  s.converged = static_cast<int>(ok.size());
  if (ok.empty()) throw NumericalError("no bootstrap replicate converged");

  auto describe = [&](const std::string& name, double estimate, double link_estimate, auto real_of, auto link_of) {
    std::vector<double> real, link;
    for (const auto* r : ok) {
      real.push_back(real_of(*r));
      link.push_back(link_of(*r));
    }
    ParamSummary p;
    p.name = name;
    p.estimate = estimate;
    p.link_estimate = link_estimate;
    p.se = sample_sd(real);
    p.cv_percent = 100.0 * p.se / std::abs(estimate);
    p.lower = percentile_nearest_rank(real, 0.025);
    p.upper = percentile_nearest_rank(real, 0.975);
    p.link_se = sample_sd(link);
    p.link_lower = percentile_nearest_rank(link, 0.025);
    p.link_upper = percentile_nearest_rank(link, 0.975);
    return p;
  };

  for (std::size_t i = 0; i < base.names.size(); ++i) {
    s.params.push_back(describe(
        base.names[i], base.real_estimates[i], base.link_estimates[i],
        [i](const BootstrapReplicate& r) { return r.real_estimates[i]; },
        [i](const BootstrapReplicate& r) { return r.link_estimates[i]; }));
  }
  s.params.push_back(describe(
      "N", base.abundance, std::log(base.abundance), [](const BootstrapReplicate& r) { return r.abundance; },
      [](const BootstrapReplicate& r) { return std::log(r.abundance); }));

  const std::size_t cells = ok.front()->density.size();
  s.qcd.resize(cells);
  std::vector<double> column(ok.size());
  for (std::size_t m = 0; m < cells; ++m) {
    for (std::size_t b = 0; b < ok.size(); ++b) column[b] = ok[b]->density[m];
    s.qcd[m] = quartile_coefficient_of_dispersion(column);
  }
  return s;
}

}  // namespace ascr
