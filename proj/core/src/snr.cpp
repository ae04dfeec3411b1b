#include "ascr/snr.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "ascr/error.hpp"
#include "ascr/numerics.hpp"
#include "ascr/parallel.hpp"

namespace ascr {

namespace {

constexpr double kUpperSigmas = 8.0;
constexpr double kQuadratureTolerance = 1e-8;

double bearing_term(double offset, const BearingParams& b, BearingModel model) {
  switch (model) {
    case BearingModel::mixture:
      return bearing_mixture_logdensity(offset, b);
    case BearingModel::single:
      return von_mises_logdensity(offset, b.kappa);
    case BearingModel::none:
      return 0.0;
  }
  return 0.0;
}

double log_sum(const std::vector<double>& v) {
  double hi = kNegInf;
  for (double x : v) hi = std::max(hi, x);
  if (hi == kNegInf) return kNegInf;
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - hi);
  return hi + std::log(sum);
}

}  // namespace

double janoschek_p(double snr, const JanoschekParams& jp) {
  if (!(snr > 0.0)) return 0.0;
  if (std::isinf(jp.theta_R)) return jp.theta_U;
  return jp.theta_U * -std::expm1(-jp.theta_R * std::pow(snr, jp.theta_I));
}

double snr_detection_function(double expected_level, double noise, const JanoschekParams& jp,
                              const PropagationParams& prop) {
  const double sigma = prop.sigma_r;
  if (std::isinf(jp.theta_R)) {
    // step curve: theta_U * P(r > c)
    return jp.theta_U * std::exp(normal_log_sf((noise - expected_level) / sigma));
  }
  const double upper = expected_level + kUpperSigmas * sigma;
  if (upper <= noise) return 0.0;
  auto integrand = [&](double r) {
    return janoschek_p(r - noise, jp) * normal_pdf((r - expected_level) / sigma) / sigma;
  };
  double error = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 15>::integrate(integrand, noise, upper, 20, 1e-12, &error);
  if (!(error <= kQuadratureTolerance) || !std::isfinite(value)) {
    throw NumericalError("detection-function quadrature did not converge (E = " + std::to_string(expected_level) +
                         ", c = " + std::to_string(noise) + ", error estimate " + std::to_string(error) + ")");
  }
  return std::clamp(value, 0.0, jp.theta_U);
}

double snr_detection_function(const SensorArray& array, std::size_t j, Point x, double s, double noise,
                              const JanoschekParams& jp, const PropagationParams& prop) {
  return snr_detection_function(expected_received_level(s, array.distance(j, x), prop), noise, jp, prop);
}

SnrLikelihood::SnrLikelihood(const SurveyGeometry& geom, const DesignMatrix& design, const SourceLevelGrid& grid,
                             const Dataset& data, NoiseSample noise_sample, ModelOptions options, int threads)
    : geom_(geom), design_(design), grid_(grid), data_(data), noise_(std::move(noise_sample)), options_(options),
      threads_(threads) {
  options_.detection = DetectionModel::snr;
  if (design_.rows() != geom_.cells()) throw ConfigError("design matrix rows differ from mesh cells");
  if (data_.sensors != geom_.sensors()) throw DataError("dataset sensor count differs from the array");
  if (data_.size() > 0 && !data_.has_noise()) throw DataError("SNR likelihood needs per-call noise levels");
  if (noise_.sensors != geom_.sensors() || noise_.rows() == 0) {
    throw DataError("noise sample needs at least one row of one value per sensor");
  }
  for (std::size_t q = 0; q < data_.omega.size(); ++q) {
    if (data_.omega[q] && data_.received[q] < data_.noise[q]) {
      throw DataError("received level below the noise level at call " + std::to_string(q / data_.sensors) +
                      ", sensor " + std::to_string(q % data_.sensors));
    }
  }
}

double SnrLikelihood::log_rate(const ModelParams& params, const SourceLevelNodes& sl, const std::vector<double>& eta,
                               const double* noise, bool singletons) const {
  const std::size_t k = geom_.sensors();
  std::vector<double> terms;
  terms.reserve(geom_.cells() * sl.nodes.size());
  std::vector<double> g(k);
  for (std::size_t m = 0; m < geom_.cells(); ++m) {
    for (std::size_t q = 0; q < sl.nodes.size(); ++q) {
      for (std::size_t j = 0; j < k; ++j) {
        const double e = sl.nodes[q] - params.prop.beta_r * geom_.log10_distance(m, j);
        g[j] = snr_detection_function(e, noise[j], params.jan, params.prop);
      }
      const double prob = singletons ? poisson_binomial_pmf(g, 1)[1] : poisson_binomial_tail(g, data_.m_min);
      terms.push_back(prob > 0.0 ? geom_.log_area(m) + eta[m] + sl.log_weights[q] + std::log(prob) : kNegInf);
    }
  }
  return log_sum(terms);
}

double SnrLikelihood::call_value(std::size_t i, const ModelParams& params, const SourceLevelNodes& sl,
                                 const std::vector<double>& eta) const {
  const std::size_t k = geom_.sensors();
  const double* noise = &data_.noise[i * k];
  const double sigma = params.prop.sigma_r;
  std::vector<double> terms;
  terms.reserve(geom_.cells() * sl.nodes.size());
  for (std::size_t m = 0; m < geom_.cells(); ++m) {
    double bearing = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (data_.detected(i, j)) {
        bearing += bearing_term(data_.bearing(i, j) - geom_.bearing(m, j), params.bearing, options_.bearing);
      }
    }
    for (std::size_t q = 0; q < sl.nodes.size(); ++q) {
      double acc = geom_.log_area(m) + eta[m] + sl.log_weights[q] + bearing;
      for (std::size_t j = 0; j < k; ++j) {
        const double e = sl.nodes[q] - params.prop.beta_r * geom_.log10_distance(m, j);
        const double g = snr_detection_function(e, noise[j], params.jan, params.prop);
        if (data_.detected(i, j)) {
          const double r = data_.received_level(i, j);
          acc += std::log(g) + normal_log_pdf((r - e) / sigma) - std::log(sigma) -
                 normal_log_sf((noise[j] - e) / sigma);
        } else {
          acc += std::log1p(-g);
        }
      }
      terms.push_back(std::isnan(acc) ? kNegInf : acc);
    }
  }
  const double num = log_sum(terms);
  const double den = log_rate(params, sl, eta, noise, false);
  if (num == kNegInf || den == kNegInf) return kNegInf;
  return num - den;
}

std::vector<double> SnrLikelihood::call_logliks(const ModelParams& params) const {
  const SourceLevelNodes sl = source_level_nodes(params.sl, grid_);
  const auto eta = log_density(params.beta, design_);
  std::vector<double> out(data_.size());
  parallel_for(out.size(), threads_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = call_value(i, params, sl, eta);
  });
  return out;
}

double SnrLikelihood::lambda(const ModelParams& params) const {
  const SourceLevelNodes sl = source_level_nodes(params.sl, grid_);
  const auto eta = log_density(params.beta, design_);
  double total = 0.0;
  for (std::size_t row = 0; row < noise_.rows(); ++row) {
    const double lr = log_rate(params, sl, eta, &noise_.values[row * noise_.sensors], false);
    if (lr != kNegInf) total += std::exp(lr);
  }
  return data_.period * total / static_cast<double>(noise_.rows());
}

double SnrLikelihood::expected_singletons(const ModelParams& params) const {
  const SourceLevelNodes sl = source_level_nodes(params.sl, grid_);
  const auto eta = log_density(params.beta, design_);
  double total = 0.0;
  for (std::size_t row = 0; row < noise_.rows(); ++row) {
    const double lr = log_rate(params, sl, eta, &noise_.values[row * noise_.sensors], true);
    if (lr != kNegInf) total += std::exp(lr);
  }
  return data_.period * total / static_cast<double>(noise_.rows());
}

LikelihoodValue SnrLikelihood::evaluate(const ModelParams& params) const {
  LikelihoodValue v;
  v.lambda = lambda(params);
  double cond = 0.0;
  for (double c : call_logliks(params)) cond += c;
  v.conditional = cond;
  v.full = poisson_logpmf(data_.size(), v.lambda) + cond;
  if (std::isnan(v.full)) v.full = kNegInf;
  return v;
}

}  // namespace ascr
