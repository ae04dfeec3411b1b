#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ascr/geometry.hpp"

namespace ascr {

struct DetectionParams {
  double g0 = 0.5;    // detection probability above threshold, in (0, 1)
  double t_r = 96.0;  // received-level threshold, dB
};

struct PropagationParams {
  double beta_r = 15.0;  // transmission loss, dB per decade of distance
  double sigma_r = 3.0;  // received-level error sd, dB
};

struct SourceLevelPrior {
  double mu_s = 160.0;
  double sigma_s = 5.0;
  bool fixed = false;  // single source level: no prior density, sigma_s unused
};

struct BearingParams {
  double kappa = 1.0;         // low-precision component concentration
  double delta_kappa = 20.0;  // extra concentration of the high-precision component
  double psi_kappa = 0.1;     // weight of the low-precision component
};

/// Evenly spaced source-level integration nodes.
class SourceLevelGrid {
 public:
  SourceLevelGrid(double lower, double upper, double step);

  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double step() const { return step_; }
  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }

 private:
  double lower_, upper_, step_;
  std::vector<double> nodes_;
};

/// s - beta_r * log10(d).
double expected_received_level(double source_level, double distance, const PropagationParams& prop);

/// Detection probability at a sensor given the expected received level.
double detect_prob_from_level(double expected_level, const DetectionParams& det, const PropagationParams& prop);

/// g0 * (1 - Phi((t_r - E[r]) / sigma_r)) for a call at x with source level s.
double detect_prob(const SensorArray& array, std::size_t j, Point x, double s, const DetectionParams& det,
                   const PropagationParams& prop);

/// Per-sensor detection probabilities at (x, s).
std::vector<double> detect_probs(const SensorArray& array, Point x, double s, const DetectionParams& det,
                                 const PropagationParams& prop);

/// P(at least m sensors detect | x, s). Throws if m > K.
double p_dot_min(const SensorArray& array, Point x, double s, int m, const DetectionParams& det,
                 const PropagationParams& prop);

/// Log-density of an observed received level under the normal truncated at t_r.
/// Throws DataError when r < t_r.
double received_level_logdensity(double r, double expected_level, const DetectionParams& det,
                                 const PropagationParams& prop);
double received_level_logdensity(double r, const SensorArray& array, std::size_t j, Point x, double s,
                                 const DetectionParams& det, const PropagationParams& prop);

/// Log-density of a von Mises distribution with concentration kappa at angular offset `offset`.
double von_mises_logdensity(double offset, double kappa);

/// Log-density of the two-component von Mises mixture at angular offset from the true bearing.
double bearing_mixture_logdensity(double offset, const BearingParams& b);
double bearing_logdensity(double y, const SensorArray& array, std::size_t j, Point x, const BearingParams& b);

/// Log-density of the source-level prior (normal truncated to (0, inf)). -inf for s <= 0.
/// Throws std::logic_error in fixed-source-level mode.
double source_level_logdensity(double s, const SourceLevelPrior& prior);

/// Log-pmf of a detection history conditional on at least m detections.
/// Throws std::invalid_argument if the history has fewer than m detections.
double detection_history_logpmf(std::span<const std::uint8_t> omega, std::span<const double> p, int m);
double detection_history_logpmf(std::span<const std::uint8_t> omega, const SensorArray& array, Point x, double s,
                                int m, const DetectionParams& det, const PropagationParams& prop);

}  // namespace ascr
