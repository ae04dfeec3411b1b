#include "ascr/observation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ascr/error.hpp"
#include "ascr/numerics.hpp"

namespace ascr {

SourceLevelGrid::SourceLevelGrid(double lower, double upper, double step)
    : lower_(lower), upper_(upper), step_(step) {
  if (!(step > 0.0) || !(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw ConfigError("source-level grid needs lower < upper and a positive step");
  }
  const auto count = static_cast<std::size_t>(std::floor((upper - lower) / step + 1e-9)) + 1;
  nodes_.reserve(count);
  for (std::size_t k = 0; k < count; ++k) nodes_.push_back(lower + static_cast<double>(k) * step);
}

double expected_received_level(double source_level, double distance, const PropagationParams& prop) {
  return source_level - prop.beta_r * std::log10(distance < kMinDistance ? kMinDistance : distance);
}

double detect_prob_from_level(double expected_level, const DetectionParams& det, const PropagationParams& prop) {
  const double z = (det.t_r - expected_level) / prop.sigma_r;
  return det.g0 * normal_cdf(-z);
}

double detect_prob(const SensorArray& array, std::size_t j, Point x, double s, const DetectionParams& det,
                   const PropagationParams& prop) {
  return detect_prob_from_level(expected_received_level(s, array.distance(j, x), prop), det, prop);
}

std::vector<double> detect_probs(const SensorArray& array, Point x, double s, const DetectionParams& det,
                                 const PropagationParams& prop) {
  std::vector<double> p(array.size());
  for (std::size_t j = 0; j < array.size(); ++j) p[j] = detect_prob(array, j, x, s, det, prop);
  return p;
}

double p_dot_min(const SensorArray& array, Point x, double s, int m, const DetectionParams& det,
                 const PropagationParams& prop) {
  if (m > static_cast<int>(array.size())) {
    throw std::invalid_argument("minimum detections " + std::to_string(m) + " exceeds sensor count " +
                                std::to_string(array.size()));
  }
  const auto p = detect_probs(array, x, s, det, prop);
  return poisson_binomial_tail(p, m);
}

double received_level_logdensity(double r, double expected_level, const DetectionParams& det,
                                 const PropagationParams& prop) {
  if (r < det.t_r) {
    throw DataError("received level " + std::to_string(r) + " dB is below the truncation threshold " +
                    std::to_string(det.t_r) + " dB");
  }
  const double z = (r - expected_level) / prop.sigma_r;
  const double zt = (det.t_r - expected_level) / prop.sigma_r;
  return normal_log_pdf(z) - std::log(prop.sigma_r) - normal_log_sf(zt);
}

double received_level_logdensity(double r, const SensorArray& array, std::size_t j, Point x, double s,
                                 const DetectionParams& det, const PropagationParams& prop) {
  return received_level_logdensity(r, expected_received_level(s, array.distance(j, x), prop), det, prop);
}

double von_mises_logdensity(double offset, double kappa) {
  return kappa * std::cos(offset) - kLogTwoPi - log_bessel_i0(kappa);
}

double bearing_mixture_logdensity(double offset, const BearingParams& b) {
  const double c = std::cos(offset);
  const double k2 = b.kappa + b.delta_kappa;
  const double low = std::log(b.psi_kappa) + b.kappa * c - log_bessel_i0(b.kappa);
  const double high = std::log1p(-b.psi_kappa) + k2 * c - log_bessel_i0(k2);
  const double hi = std::max(low, high);
  return hi + std::log(std::exp(low - hi) + std::exp(high - hi)) - kLogTwoPi;
}

double bearing_logdensity(double y, const SensorArray& array, std::size_t j, Point x, const BearingParams& b) {
  return bearing_mixture_logdensity(y - array.true_bearing(j, x), b);
}

double source_level_logdensity(double s, const SourceLevelPrior& prior) {
  if (prior.fixed) throw std::logic_error("source-level density is undefined in fixed-source-level mode");
  if (s <= 0.0) return kNegInf;
  const double z = (s - prior.mu_s) / prior.sigma_s;
  // mass of the untruncated normal above 0
  const double log_mass = normal_log_sf(-prior.mu_s / prior.sigma_s);
  return normal_log_pdf(z) - std::log(prior.sigma_s) - log_mass;
}

double detection_history_logpmf(std::span<const std::uint8_t> omega, std::span<const double> p, int m) {
  if (omega.size() != p.size()) throw std::invalid_argument("detection history length differs from sensor count");
  int detections = 0;
  double log_num = 0.0;
  for (std::size_t j = 0; j < omega.size(); ++j) {
    if (omega[j]) {
      ++detections;
      log_num += std::log(p[j]);
    } else {
      log_num += std::log1p(-p[j]);
    }
  }
  if (detections < m) {
    throw std::invalid_argument("detection history has " + std::to_string(detections) +
                                " detections, fewer than the conditioning minimum " + std::to_string(m));
  }
  return log_num - std::log(poisson_binomial_tail(p, m));
}

double detection_history_logpmf(std::span<const std::uint8_t> omega, const SensorArray& array, Point x, double s,
                                int m, const DetectionParams& det, const PropagationParams& prop) {
  if (m > static_cast<int>(array.size())) {
    throw std::invalid_argument("minimum detections exceeds sensor count");
  }
  const auto p = detect_probs(array, x, s, det, prop);
  return detection_history_logpmf(omega, p, m);
}

}  // namespace ascr
