#pragma once

#include <vector>

#include "ascr/likelihood.hpp"
#include "ascr/params.hpp"

namespace ascr {

/// theta_U * (1 - exp(-theta_R * snr^theta_I)) for snr > 0, else 0. An
/// infinite theta_R gives the step theta_U * [snr > 0].
double janoschek_p(double snr, const JanoschekParams& jp);

/// Detection probability at a sensor with noise c given the expected received
/// level: integral over r in [c, E + 8 sigma_r] of p(r - c) phi((r - E) / sigma_r) / sigma_r.
/// Throws NumericalError when the adaptive quadrature does not reach 1e-8.
double snr_detection_function(double expected_level, double noise, const JanoschekParams& jp,
                              const PropagationParams& prop);
double snr_detection_function(const SensorArray& array, std::size_t j, Point x, double s, double noise,
                              const JanoschekParams& jp, const PropagationParams& prop);

/// Randomly sampled noise snapshots, b rows of K values (dB).
struct NoiseSample {
  std::size_t sensors = 0;
  std::vector<double> values;

  std::size_t rows() const { return sensors == 0 ? 0 : values.size() / sensors; }
  double at(std::size_t row, std::size_t j) const { return values[row * sensors + j]; }
};

/// Likelihood with the Janoschek SNR detection function. Per-call noise comes
/// from Dataset::noise; the Poisson rate averages over the noise sample rows.
class SnrLikelihood final : public LikelihoodModel {
 public:
  SnrLikelihood(const SurveyGeometry& geom, const DesignMatrix& design, const SourceLevelGrid& grid,
                const Dataset& data, NoiseSample noise_sample, ModelOptions options, int threads = 1);

  LikelihoodValue evaluate(const ModelParams& params) const override;
  std::vector<double> call_logliks(const ModelParams& params) const;
  double lambda(const ModelParams& params) const;
  double expected_singletons(const ModelParams& params) const override;

  const Dataset& data() const override { return data_; }
  const SurveyGeometry& geometry() const override { return geom_; }
  const DesignMatrix& design() const override { return design_; }
  const SourceLevelGrid& grid() const override { return grid_; }
  const ModelOptions& options() const override { return options_; }
  const NoiseSample& noise_sample() const { return noise_; }

 private:
  double call_value(std::size_t i, const ModelParams& params, const SourceLevelNodes& sl,
                    const std::vector<double>& eta) const;
  // log sum over (cell, node) of area * D * w * f(noise row), f = P(>= m_min) or P(== 1)
  double log_rate(const ModelParams& params, const SourceLevelNodes& sl, const std::vector<double>& eta,
                  const double* noise, bool singletons) const;

  const SurveyGeometry& geom_;
  const DesignMatrix& design_;
  SourceLevelGrid grid_;
  const Dataset& data_;
  NoiseSample noise_;
  ModelOptions options_;
  int threads_;
};

}  // namespace ascr
