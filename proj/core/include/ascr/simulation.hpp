#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ascr/dataset.hpp"
#include "ascr/design.hpp"
#include "ascr/fit.hpp"
#include "ascr/likelihood.hpp"
#include "ascr/params.hpp"

namespace ascr {

struct SimConfig {
  ModelParams truth;      // density coefficients on the design-matrix scale
  ModelOptions options;   // source-level mode and bearing model of the generator
  int m_min = 2;
  double period = 1.0;
  bool uniform_within_cell = false;  // default places calls at cell centroids
  std::uint64_t seed = 1;
};

struct LatentCall {
  std::size_t cell = 0;
  Point position;
  double source_level = 0.0;
};

struct Simulation {
  Dataset data;
  std::vector<LatentCall> latent;  // retained calls, aligned with data rows
  std::uint64_t emitted = 0;       // all calls emitted over the mesh
  double expected_emitted = 0.0;   // period * sum of area * density
};

/// Draws one dataset: Poisson counts per cell, source levels, noisy received
/// levels, threshold detection with probability g0, von Mises bearing errors,
/// then drops calls detected on fewer than m_min sensors.
Simulation simulate(const SurveyGeometry& geom, const DesignMatrix& design, const SimConfig& config);

enum class AnalysisModel { a, b, c, d, e };

std::string to_string(AnalysisModel model);
AnalysisModel parse_analysis_model(const std::string& text);

struct ScenarioSpec {
  std::string name;
  SimConfig sim;           // seed is the base seed; replicate r uses stream_seed(seed, r)
  std::string formula;     // true density formula
  bool standardize = false;
};

struct ScenarioCell {
  std::string scenario;
  AnalysisModel model = AnalysisModel::a;
  double true_abundance = 0.0;
  std::vector<double> estimates;         // per replicate, NaN where not converged
  std::vector<bool> converged;
  std::vector<double> relative_errors;   // converged replicates only
  int non_converged = 0;
  double relative_bias = 0.0;
  double cv = 0.0;
  double mean_detected = 0.0;            // mean retained calls per replicate
  std::vector<ModelParams> fitted;       // per replicate estimates
};

/// Options of analysis model `model` applied to data generated with `truth_options`:
/// b flips the source-level mode, c uses a single bearing component,
/// d drops bearings, e keeps the truth options with a homogeneous density.
ModelOptions analysis_options(AnalysisModel model, const ModelOptions& truth_options);

/// Simulates `replicates` datasets and fits each with every requested model.
/// Fits start at the true values of the shared parameters.
std::vector<ScenarioCell> run_scenario(const SurveyGeometry& geom, const SourceLevelGrid& grid,
                                       const ScenarioSpec& spec, const std::vector<AnalysisModel>& models,
                                       int replicates, const FitConfig& fit_config);

/// Relative bias and CV from per-replicate estimates (converged entries only).
void summarize_cell(ScenarioCell& cell);

}  // namespace ascr
