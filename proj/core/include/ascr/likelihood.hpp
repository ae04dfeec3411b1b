#pragma once

#include <memory>
#include <mutex>
#include <vector>

#include "ascr/dataset.hpp"
#include "ascr/design.hpp"
#include "ascr/geometry.hpp"
#include "ascr/mesh.hpp"
#include "ascr/observation.hpp"
#include "ascr/params.hpp"

namespace ascr {

/// Minimum fraction of the source-level prior mass the grid must cover.
inline constexpr double kMinSourceLevelCoverage = 1.0 - 1e-6;

/// Source-level integration nodes with their log masses.
struct SourceLevelNodes {
  std::vector<double> nodes;
  std::vector<double> log_weights;
};

/// Rectangle-rule masses of the truncated-normal prior at the grid nodes,
/// renormalized to sum to 1. Throws ConfigError when the grid (extended by half
/// a step on each side) covers less than kMinSourceLevelCoverage of the prior.
std::vector<double> sl_weights(const SourceLevelPrior& prior, const SourceLevelGrid& grid);

/// Grid nodes and weights, or the single node mu_s with weight 1 in fixed mode.
SourceLevelNodes source_level_nodes(const SourceLevelPrior& prior, const SourceLevelGrid& grid);

/// Per-(cell, sensor) distances and bearings plus cell areas in density units.
class SurveyGeometry {
 public:
  SurveyGeometry(SensorArray array, Mesh mesh, double area_unit_m2 = 1e6);

  const SensorArray& array() const { return array_; }
  const Mesh& mesh() const { return mesh_; }
  std::size_t cells() const { return mesh_.size(); }
  std::size_t sensors() const { return array_.size(); }
  double area_unit_m2() const { return area_unit_m2_; }

  double log10_distance(std::size_t m, std::size_t j) const { return log10_distance_[m * sensors() + j]; }
  double bearing(std::size_t m, std::size_t j) const { return bearing_[m * sensors() + j]; }
  /// log(cell area / area unit).
  double log_area(std::size_t m) const { return log_area_[m]; }

 private:
  SensorArray array_;
  Mesh mesh_;
  double area_unit_m2_;
  std::vector<double> log10_distance_;
  std::vector<double> bearing_;
  std::vector<double> log_area_;
};

/// Per-(cell, node) multiply-detection probabilities p.(x_m, s_k) for m_min,
/// laid out [m * nodes + k]. Returns zeros when m_min exceeds the sensor count.
std::vector<double> p_dot_grid(const SurveyGeometry& geom, const SourceLevelNodes& sl, const ModelParams& params,
                               int m_min);

struct LikelihoodValue {
  double full = 0.0;
  double conditional = 0.0;
  double lambda = 0.0;
};

/// Common interface of the threshold and SNR likelihoods.
class LikelihoodModel {
 public:
  virtual ~LikelihoodModel() = default;
  virtual LikelihoodValue evaluate(const ModelParams& params) const = 0;
  virtual double expected_singletons(const ModelParams& params) const = 0;
  virtual const Dataset& data() const = 0;
  virtual const SurveyGeometry& geometry() const = 0;
  virtual const DesignMatrix& design() const = 0;
  virtual const SourceLevelGrid& grid() const = 0;
  virtual const ModelOptions& options() const = 0;
};

/// Full and conditional log-likelihood of a dataset under the threshold
/// detection model, marginalized over mesh cells and source-level nodes.
/// The dataset, design and geometry must outlive the object.
class Likelihood final : public LikelihoodModel {
 public:
  Likelihood(const SurveyGeometry& geom, const DesignMatrix& design, const SourceLevelGrid& grid,
             const Dataset& data, ModelOptions options, int threads = 1);

  LikelihoodValue evaluate(const ModelParams& params) const override;
  /// Per-call contributions in call order.
  std::vector<double> call_logliks(const ModelParams& params) const;
  double conditional_loglik(const ModelParams& params) const { return evaluate(params).conditional; }
  double full_loglik(const ModelParams& params) const { return evaluate(params).full; }
  double lambda_detected(const ModelParams& params) const;
  double expected_singletons(const ModelParams& params) const override;

  const Dataset& data() const override { return data_; }
  const SurveyGeometry& geometry() const override { return geom_; }
  const DesignMatrix& design() const override { return design_; }
  const SourceLevelGrid& grid() const override { return grid_; }
  const ModelOptions& options() const override { return options_; }

 private:
  // Everything except the density surface, kept for the last parameter set so
  // that changes to the density coefficients alone are cheap.
  struct Cache;
  std::vector<double> cache_key(const ModelParams& params) const;
  std::shared_ptr<const Cache> detection_terms(const ModelParams& params) const;
  double log_rate(const Cache& cache, const std::vector<double>& eta) const;
  std::vector<double> calls(const Cache& cache, const std::vector<double>& eta, double log_den) const;

  const SurveyGeometry& geom_;
  const DesignMatrix& design_;
  SourceLevelGrid grid_;
  const Dataset& data_;
  ModelOptions options_;
  int threads_;
  // per call: detected sensor indices, their levels, and cos(y - bearing) per (cell, detection)
  std::vector<std::vector<std::size_t>> det_sensors_;
  std::vector<std::vector<double>> det_levels_;
  std::vector<std::vector<double>> cos_offsets_;  // [m * ndet + d]
  std::vector<std::vector<std::uint8_t>> patterns_;  // distinct detection histories
  std::vector<std::size_t> pattern_;                 // per call index into patterns_
  double min_received_;
  mutable std::mutex cache_mutex_;
  mutable std::shared_ptr<const Cache> cache_;
};

/// Poisson log-pmf of n with mean lambda; -inf when lambda = 0 and n > 0.
double poisson_logpmf(std::size_t n, double lambda);

}  // namespace ascr
