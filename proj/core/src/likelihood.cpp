#include "ascr/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ascr/error.hpp"
#include "ascr/numerics.hpp"
#include "ascr/parallel.hpp"

namespace ascr {

namespace {

constexpr double kInvSqrtTwo = 0.70710678118654752440;

}  // namespace

std::vector<double> sl_weights(const SourceLevelPrior& prior, const SourceLevelGrid& grid) {
  if (prior.fixed) return {1.0};
  if (!(prior.sigma_s > 0.0)) throw ConfigError("source-level sd must be positive");
  const double half = 0.5 * grid.step();
  const double lo = (grid.lower() - half - prior.mu_s) / prior.sigma_s;
  const double hi = (grid.upper() + half - prior.mu_s) / prior.sigma_s;
  // prior mass outside the grid, relative to the mass of the truncated prior on (0, inf)
  const double outside = (normal_cdf(lo) - normal_cdf(-prior.mu_s / prior.sigma_s) + normal_cdf(-hi)) /
                         normal_cdf(prior.mu_s / prior.sigma_s);
  if (!(1.0 - outside >= kMinSourceLevelCoverage)) {
    throw ConfigError("source-level grid [" + std::to_string(grid.lower()) + ", " + std::to_string(grid.upper()) +
                      "] covers too little of the prior (mu_s = " + std::to_string(prior.mu_s) +
                      ", sigma_s = " + std::to_string(prior.sigma_s) + "); widen the grid");
  }
  std::vector<double> w;
  w.reserve(grid.size());
  double total = 0.0;
  for (double s : grid.nodes()) {
    const double v = s > 0.0 ? std::exp(source_level_logdensity(s, prior)) * grid.step() : 0.0;
    w.push_back(v);
    total += v;
  }
  if (!(total > 0.0)) throw NumericalError("source-level weights sum to zero");
  for (double& v : w) v /= total;
  return w;
}

SourceLevelNodes source_level_nodes(const SourceLevelPrior& prior, const SourceLevelGrid& grid) {
  SourceLevelNodes out;
  if (prior.fixed) {
    out.nodes = {prior.mu_s};
    out.log_weights = {0.0};
    return out;
  }
  const auto w = sl_weights(prior, grid);
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (w[k] > 0.0) {
      out.nodes.push_back(grid.nodes()[k]);
      out.log_weights.push_back(std::log(w[k]));
    }
  }
  return out;
}

SurveyGeometry::SurveyGeometry(SensorArray array, Mesh mesh, double area_unit_m2)
    : array_(std::move(array)), mesh_(std::move(mesh)), area_unit_m2_(area_unit_m2) {
  if (!(area_unit_m2_ > 0.0)) throw ConfigError("area unit must be positive");
  const std::size_t k = array_.size();
  log10_distance_.resize(mesh_.size() * k);
  bearing_.resize(mesh_.size() * k);
  log_area_.resize(mesh_.size());
  for (std::size_t m = 0; m < mesh_.size(); ++m) {
    const Point x = mesh_[m].centroid;
    log_area_[m] = std::log(mesh_[m].area / area_unit_m2_);
    for (std::size_t j = 0; j < k; ++j) {
      log10_distance_[m * k + j] = std::log10(array_.distance(j, x));
      bearing_[m * k + j] = bearing_between(array_[j], x);
    }
  }
}

std::vector<double> p_dot_grid(const SurveyGeometry& geom, const SourceLevelNodes& sl, const ModelParams& params,
                               int m_min) {
  const std::size_t cells = geom.cells();
  const std::size_t nodes = sl.nodes.size();
  const std::size_t k = geom.sensors();
  std::vector<double> out(cells * nodes, 0.0);
  if (m_min > static_cast<int>(k)) return out;
  std::vector<double> p(k);
  for (std::size_t m = 0; m < cells; ++m) {
    for (std::size_t q = 0; q < nodes; ++q) {
      for (std::size_t j = 0; j < k; ++j) {
        const double e = sl.nodes[q] - params.prop.beta_r * geom.log10_distance(m, j);
        p[j] = detect_prob_from_level(e, params.det, params.prop);
      }
      out[m * nodes + q] = poisson_binomial_tail(p, m_min);
    }
  }
  return out;
}

double poisson_logpmf(std::size_t n, double lambda) {
  if (lambda < 0.0 || !std::isfinite(lambda)) throw NumericalError("invalid Poisson mean");
  if (lambda == 0.0) return n == 0 ? 0.0 : kNegInf;
  const double dn = static_cast<double>(n);
  return dn * std::log(lambda) - lambda - std::lgamma(dn + 1.0);
}

struct Likelihood::Cache {
  std::vector<double> key;        // parameters other than the density coefficients
  std::vector<double> call_cell;  // [i * cells + m]: log of the call's integrand summed over nodes, density excluded
  std::vector<double> rate_cell;  // [m]: log sum over nodes of w * p.
};

Likelihood::Likelihood(const SurveyGeometry& geom, const DesignMatrix& design, const SourceLevelGrid& grid,
                       const Dataset& data, ModelOptions options, int threads)
    : geom_(geom), design_(design), grid_(grid), data_(data), options_(options), threads_(threads) {
  if (design_.rows() != geom_.cells()) throw ConfigError("design matrix rows differ from mesh cells");
  if (data_.sensors != geom_.sensors()) {
    throw DataError("dataset has " + std::to_string(data_.sensors) + " sensors, array has " +
                    std::to_string(geom_.sensors()));
  }
  const std::size_t n = data_.size();
  const std::size_t cells = geom_.cells();
  det_sensors_.resize(n);
  det_levels_.resize(n);
  cos_offsets_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < data_.sensors; ++j) {
      if (!data_.detected(i, j)) continue;
      det_sensors_[i].push_back(j);
      det_levels_[i].push_back(data_.received_level(i, j));
    }
    const std::size_t nd = det_sensors_[i].size();
    cos_offsets_[i].resize(cells * nd);
    for (std::size_t m = 0; m < cells; ++m) {
      for (std::size_t d = 0; d < nd; ++d) {
        const std::size_t j = det_sensors_[i][d];
        cos_offsets_[i][m * nd + d] = std::cos(data_.bearing(i, j) - geom_.bearing(m, j));
      }
    }
  }
  pattern_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::uint8_t> mask(data_.sensors, 0);
    for (std::size_t j : det_sensors_[i]) mask[j] = 1;
    const auto it = std::find(patterns_.begin(), patterns_.end(), mask);
    pattern_[i] = static_cast<std::size_t>(it - patterns_.begin());
    if (it == patterns_.end()) patterns_.push_back(std::move(mask));
  }
  min_received_ = data_.min_received();
}

std::vector<double> Likelihood::cache_key(const ModelParams& p) const {
  return {p.det.g0,   p.det.t_r,   p.prop.beta_r,    p.prop.sigma_r,     p.sl.mu_s,
          p.sl.sigma_s, p.sl.fixed ? 1.0 : 0.0, p.bearing.kappa, p.bearing.delta_kappa, p.bearing.psi_kappa};
}

std::shared_ptr<const Likelihood::Cache> Likelihood::detection_terms(const ModelParams& params) const {
  auto key = cache_key(params);
  {
    std::lock_guard lock(cache_mutex_);
    if (cache_ && cache_->key == key) return cache_;
  }
  if (min_received_ < params.det.t_r) {
    throw DataError("received level " + std::to_string(min_received_) + " dB is below the threshold " +
                    std::to_string(params.det.t_r) + " dB");
  }
  auto cache = std::make_shared<Cache>();
  cache->key = std::move(key);
  const SourceLevelNodes sl = source_level_nodes(params.sl, grid_);
  const std::size_t cells = geom_.cells();
  const std::size_t nodes = sl.nodes.size();
  const std::size_t k = geom_.sensors();
  const double g0 = params.det.g0;
  const double inv_sigma = 1.0 / params.prop.sigma_r;

  // per (cell, node): log(1 - p_j) at every sensor and the log detection rate
  std::vector<double> log1m_p(cells * nodes * k);
  cache->rate_cell.resize(cells);
  std::vector<double> p(k), den(nodes);
  for (std::size_t m = 0; m < cells; ++m) {
    for (std::size_t q = 0; q < nodes; ++q) {
      const std::size_t mq = m * nodes + q;
      for (std::size_t j = 0; j < k; ++j) {
        const double e = sl.nodes[q] - params.prop.beta_r * geom_.log10_distance(m, j);
        const double zt = (params.det.t_r - e) * inv_sigma;
        p[j] = g0 * 0.5 * std::erfc(zt * kInvSqrtTwo);
        log1m_p[mq * k + j] = std::log1p(-p[j]);
      }
      const double pdot = poisson_binomial_tail(p, data_.m_min);
      den[q] = pdot > 0.0 ? sl.log_weights[q] + std::log(pdot) : kNegInf;
    }
    cache->rate_cell[m] = log_sum_exp_inplace(den.data(), nodes);
  }

  // log w + sum of log(1 - p_j) over the sensors each detection pattern missed,
  // laid out [(pattern * cells + m) * nodes + q]
  std::vector<double> missed(patterns_.size() * cells * nodes);
  for (std::size_t a = 0; a < patterns_.size(); ++a) {
    for (std::size_t mq = 0; mq < cells * nodes; ++mq) {
      double sum = sl.log_weights[mq % nodes];
      for (std::size_t j = 0; j < k; ++j) {
        if (!patterns_[a][j]) sum += log1m_p[mq * k + j];
      }
      missed[a * cells * nodes + mq] = sum;
    }
  }

  // log g0 + log phi(z) - log sigma per detection; the (1 - Phi) factors of the
  // detection probability and the truncated level density cancel.
  const double per_det = std::log(g0) - 0.5 * kLogTwoPi - std::log(params.prop.sigma_r);
  // Bearing densities in linear space: w exp(kappa (c - 1)) with the exp(kappa)
  // factor folded into the weight keeps every exponent non-positive.
  const BearingParams& b = params.bearing;
  double w_low = 0.0, w_high = 0.0, k_low = 0.0, k_high = 0.0;
  if (options_.bearing == BearingModel::mixture) {
    k_low = b.kappa;
    k_high = b.kappa + b.delta_kappa;
    w_low = std::exp(std::log(b.psi_kappa) + k_low - log_bessel_i0(k_low) - kLogTwoPi);
    w_high = std::exp(std::log1p(-b.psi_kappa) + k_high - log_bessel_i0(k_high) - kLogTwoPi);
  } else if (options_.bearing == BearingModel::single) {
    k_low = b.kappa;
    w_low = std::exp(k_low - log_bessel_i0(k_low) - kLogTwoPi);
  }

  // source levels centred to keep the quadratic below well conditioned
  const double s0 = sl.nodes[nodes / 2];
  std::vector<double> t(nodes);
  for (std::size_t q = 0; q < nodes; ++q) t[q] = sl.nodes[q] - s0;
  const double half_prec = 0.5 * inv_sigma * inv_sigma;

  const std::size_t n = data_.size();
  cache->call_cell.resize(n * cells);
  parallel_for(n, threads_, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buf(nodes), bearing(cells);
    for (std::size_t i = begin; i < end; ++i) {
      const auto& sensors = det_sensors_[i];
      const auto& levels = det_levels_[i];
      const auto& cosv = cos_offsets_[i];
      const std::size_t nd = sensors.size();
      std::fill(bearing.begin(), bearing.end(), 1.0);
      if (options_.bearing != BearingModel::none) {
        for (std::size_t d = 0; d < nd; ++d) {
          for (std::size_t m = 0; m < cells; ++m) {
            const double c = cosv[m * nd + d] - 1.0;
            bearing[m] *= w_low * exp_nonpositive(k_low * c) + w_high * exp_nonpositive(k_high * c);
          }
        }
      }
      const double det_terms = static_cast<double>(nd) * per_det;
      const double* miss_i = &missed[pattern_[i] * cells * nodes];
      for (std::size_t m = 0; m < cells; ++m) {
        // sum_d (u_d - t)^2 / (2 sigma^2) with u_d = r_d - s0 + beta_r log10 d_mj
        double su = 0.0, suu = 0.0;
        for (std::size_t d = 0; d < nd; ++d) {
          const double u = levels[d] - s0 + params.prop.beta_r * geom_.log10_distance(m, sensors[d]);
          su += u;
          suu += u * u;
        }
        const double c0 = -half_prec * suu;
        const double c1 = 2.0 * half_prec * su;
        const double c2 = -half_prec * static_cast<double>(nd);
        const double* miss = miss_i + m * nodes;
        for (std::size_t q = 0; q < nodes; ++q) buf[q] = miss[q] + c0 + t[q] * (c1 + c2 * t[q]);
        double hi = kNegInf;
        const double sum = sum_exp_scaled(buf.data(), nodes, hi);
        const double value = hi == kNegInf ? kNegInf : det_terms + hi + std::log(sum * bearing[m]);
        cache->call_cell[i * cells + m] = value;
      }
    }
  });

  std::lock_guard lock(cache_mutex_);
  cache_ = cache;
  return cache;
}

double Likelihood::log_rate(const Cache& cache, const std::vector<double>& eta) const {
  const std::size_t cells = geom_.cells();
  std::vector<double> v(cells);
  for (std::size_t m = 0; m < cells; ++m) v[m] = geom_.log_area(m) + eta[m] + cache.rate_cell[m];
  return log_sum_exp_inplace(v.data(), cells);
}

std::vector<double> Likelihood::calls(const Cache& cache, const std::vector<double>& eta, double log_den) const {
  const std::size_t n = data_.size();
  const std::size_t cells = geom_.cells();
  std::vector<double> out(n);
  std::vector<double> cell(cells);
  for (std::size_t m = 0; m < cells; ++m) cell[m] = geom_.log_area(m) + eta[m];
  std::vector<double> buf(cells);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &cache.call_cell[i * cells];
    for (std::size_t m = 0; m < cells; ++m) buf[m] = cell[m] + row[m];
    const double num = log_sum_exp_inplace(buf.data(), cells);
    out[i] = (num == kNegInf || log_den == kNegInf) ? kNegInf : num - log_den;
  }
  return out;
}

std::vector<double> Likelihood::call_logliks(const ModelParams& params) const {
  const auto cache = detection_terms(params);
  const auto eta = log_density(params.beta, design_);
  return calls(*cache, eta, log_rate(*cache, eta));
}

LikelihoodValue Likelihood::evaluate(const ModelParams& params) const {
  const auto cache = detection_terms(params);
  const auto eta = log_density(params.beta, design_);
  const double log_den = log_rate(*cache, eta);
  LikelihoodValue v;
  v.lambda = log_den == kNegInf ? 0.0 : data_.period * std::exp(log_den);
  double cond = 0.0;
  for (double c : calls(*cache, eta, log_den)) cond += c;
  v.conditional = cond;
  v.full = poisson_logpmf(data_.size(), v.lambda) + cond;
  if (std::isnan(v.full)) v.full = kNegInf;
  return v;
}

double Likelihood::lambda_detected(const ModelParams& params) const {
  const auto cache = detection_terms(params);
  const double log_den = log_rate(*cache, log_density(params.beta, design_));
  return log_den == kNegInf ? 0.0 : data_.period * std::exp(log_den);
}

double Likelihood::expected_singletons(const ModelParams& params) const {
  const auto sl = source_level_nodes(params.sl, grid_);
  const auto eta = log_density(params.beta, design_);
  const std::size_t k = geom_.sensors();
  std::vector<double> p(k);
  double total = 0.0;
  for (std::size_t m = 0; m < geom_.cells(); ++m) {
    const double cell = std::exp(geom_.log_area(m) + eta[m]);
    double inner = 0.0;
    for (std::size_t q = 0; q < sl.nodes.size(); ++q) {
      for (std::size_t j = 0; j < k; ++j) {
        p[j] = detect_prob_from_level(sl.nodes[q] - params.prop.beta_r * geom_.log10_distance(m, j), params.det,
                                      params.prop);
      }
      inner += std::exp(sl.log_weights[q]) * poisson_binomial_pmf(p, 1)[1];
    }
    total += cell * inner;
  }
  return data_.period * total;
}

}  // namespace ascr
