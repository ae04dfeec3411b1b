#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ascr/mesh.hpp"
#include "ascr/params.hpp"

namespace ascr {

struct DataPaths {
  std::string sensors;       // sensor_id,easting,northing
  std::string covariates;    // regular grid easting,northing,<covariates>
  std::string mesh;          // precomputed mesh CSV (overrides covariates + mesh settings)
  std::string detections;
  std::string bearings;
  std::string received;
  std::string call_noise;
  std::string noise_sample;
};

struct SimulationSettings {
  int scenario = 1;           // 1 variable source level, 2 fixed; 0 uses `truth`
  std::optional<ModelParams> truth;
  std::string truth_formula;  // density formula of `truth`
  ModelOptions truth_options;
  int replicates = 30;
  std::string models = "abcde";
  bool uniform_within_cell = false;
};

/// Every setting of a run. Defaults follow config_schema().
struct RunConfig {
  DataPaths data;
  bool synthetic_survey = false;  // built-in six-sensor array and covariates
  bool sea_only = false;          // synthetic survey: drop land cells
  std::string formula = "D ~ 1";
  std::string formulas;           // candidate list file for `select`
  double t_r = 96.0;
  int m_min = 2;
  double period = 1.0;
  double area_unit_m2 = 1e6;
  ModelOptions options;
  double sl_lower = 100.0;
  double sl_upper = 220.0;
  double sl_step = 3.0;
  MeshSpec mesh{10000.0, 2500.0, 50000.0, 5000.0};
  bool standardize = true;
  int max_iterations = 200;
  double rel_tol = 1e-8;
  double grad_tol = 1e-4;
  int multistart = 0;
  double jitter_sd = 0.5;
  std::optional<ModelParams> start;
  int bootstrap_replicates = 999;
  bool bootstrap_start_at_base = true;
  double buffer_threshold = 0.001;
  SimulationSettings simulation;
  std::uint64_t seed = 1;
  int threads = 1;
};

/// Parses a JSON config document. Unknown keys, wrong types and values out of
/// range throw ConfigError naming the key.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// JSON document listing every key with its type, default and meaning.
std::string config_schema();
/// Plain-text key list for --help.
std::string config_help();

}  // namespace ascr
