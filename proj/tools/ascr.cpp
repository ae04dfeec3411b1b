// Command-line front end: fit, simulate, scenarios, bootstrap, select,
// check-buffer and config-schema.

#include <CLI11.hpp>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "ascr/bootstrap.hpp"
#include "ascr/buffer.hpp"
#include "ascr/config.hpp"
#include "ascr/error.hpp"
#include "ascr/fit.hpp"
#include "ascr/formula.hpp"
#include "ascr/io.hpp"
#include "ascr/report.hpp"
#include "ascr/simulation.hpp"
#include "ascr/snr.hpp"
#include "ascr/synthetic.hpp"

namespace fs = std::filesystem;
using namespace ascr;

namespace {

struct Flags {
  std::string config;
  std::string out = ".";
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

void progress(const std::string& msg) { std::cerr << "ascr: " << msg << std::endl; }

std::string out_path(const Flags& f, const std::string& name) { return (fs::path(f.out) / name).string(); }

RunConfig load(const Flags& f) {
  RunConfig cfg = f.config.empty() ? parse_config("{}") : load_config(f.config);
  if (f.threads) {
    if (*f.threads < 1) throw ConfigError("--threads must be at least 1");
    cfg.threads = *f.threads;
  }
  if (f.seed) cfg.seed = *f.seed;
  fs::create_directories(f.out);
  return cfg;
}

struct Survey {
  SensorArray array;
  Mesh mesh;
};

// Synthetic surveys carry their own mesh layout; file surveys use the mesh.* settings.
Survey load_survey(const RunConfig& cfg) {
  if (cfg.synthetic_survey) {
    SensorArray array = synthetic_array();
    Mesh mesh = cfg.data.mesh.empty() ? synthetic_mesh(array, synthetic_mesh_spec(), cfg.sea_only)
                                      : read_mesh_csv(cfg.data.mesh);
    return {std::move(array), std::move(mesh)};
  }
  if (cfg.data.sensors.empty()) throw ConfigError("data.sensors is required unless survey.synthetic is true");
  SensorArray array = read_sensors(cfg.data.sensors);
  if (!cfg.data.mesh.empty()) return {array, read_mesh_csv(cfg.data.mesh)};
  if (cfg.data.covariates.empty()) throw ConfigError("data.covariates or data.mesh is required");
  const GriddedCovariates cov = read_covariate_grid(cfg.data.covariates);
  Mesh mesh = build_mesh(array, cov, cfg.mesh);
  return {std::move(array), std::move(mesh)};
}

SourceLevelGrid make_grid(const RunConfig& cfg) { return SourceLevelGrid(cfg.sl_lower, cfg.sl_upper, cfg.sl_step); }

FitConfig fit_config(const RunConfig& cfg) {
  FitConfig f;
  f.options = cfg.options;
  f.standardize = cfg.standardize;
  f.t_r = cfg.t_r;
  f.max_iterations = cfg.max_iterations;
  f.rel_tol = cfg.rel_tol;
  f.grad_tol = cfg.grad_tol;
  f.start = cfg.start;
  f.multistart = cfg.multistart;
  f.jitter_sd = cfg.jitter_sd;
  f.seed = cfg.seed;
  f.threads = cfg.threads;
  return f;
}

ModelFormula formula_for(const std::string& text, const Mesh& mesh) {
  try {
    return parse_formula(text, mesh.covariate_names());
  } catch (const FormulaError& e) {
    throw ConfigError("formula '" + text + "': " + e.what());
  }
}

// Reads the detection matrices, applies the threshold and m_min filters and
// writes the truncation report.
Dataset load_data(const RunConfig& cfg, const Flags& f, std::size_t sensors) {
  const bool snr = cfg.options.detection == DetectionModel::snr;
  if (cfg.data.detections.empty() || cfg.data.received.empty()) {
    throw ConfigError("data.detections and data.received are required");
  }
  if (snr && cfg.data.call_noise.empty()) throw ConfigError("the SNR model needs data.call_noise");
  const DetectionFiles files{cfg.data.detections, cfg.data.bearings, cfg.data.received,
                             snr ? cfg.data.call_noise : std::string()};
  const RawDetections raw = read_raw_detections(files);
  if (raw.sensors != sensors) {
    throw DataError(cfg.data.detections + ": " + std::to_string(raw.sensors) + " sensor columns, survey has " +
                    std::to_string(sensors));
  }
  auto [data, report] = load_and_truncate(raw, cfg.t_r, cfg.m_min);
  data.period = cfg.period;
  write_text(out_path(f, "truncation.json"), truncation_json(report));
  progress(std::to_string(report.retained) + " of " + std::to_string(report.raw_calls) + " calls retained");
  if (data.size() == 0) throw DataError("no calls left after truncation");
  return std::move(data);
}

FitResult run_fit(const SurveyGeometry& geom, const SourceLevelGrid& grid, const Dataset& data,
                  const ModelFormula& formula, const RunConfig& cfg) {
  const FitConfig fc = fit_config(cfg);
  if (cfg.options.detection == DetectionModel::threshold) return fit(geom, grid, data, formula, fc);
  if (cfg.data.noise_sample.empty()) throw ConfigError("the SNR model needs data.noise_sample");
  NoiseSample noise = read_noise_sample(cfg.data.noise_sample);
  if (noise.sensors != geom.sensors()) throw DataError(cfg.data.noise_sample + ": sensor count does not match");
  const DesignMatrix design = build_design_matrix(formula, geom.mesh(), cfg.standardize);
  const SnrLikelihood model(geom, design, grid, data, std::move(noise), cfg.options, cfg.threads);
  return fit_model(model, to_string(formula), fc);
}

void write_fit(const Flags& f, const FitResult& r, const Mesh& mesh) {
  write_text(out_path(f, "fit.json"), fit_json(r));
  write_text(out_path(f, "timing.json"), timing_json(r.runtime_seconds, r.evaluations));
  write_density_csv(out_path(f, "density.csv"), mesh, r.log_density);
  progress("log L " + format_number(r.loglik) + ", N " + format_number(r.abundance) +
           (r.converged ? "" : " (not converged: " + r.message + ")"));
}

int cmd_fit(const Flags& f) {
  const RunConfig cfg = load(f);
  Survey s = load_survey(cfg);
  write_mesh_csv(out_path(f, "mesh.csv"), s.mesh);
  const SurveyGeometry geom(s.array, s.mesh, cfg.area_unit_m2);
  const Dataset data = load_data(cfg, f, geom.sensors());
  const ModelFormula formula = formula_for(cfg.formula, geom.mesh());
  progress("fitting " + to_string(formula));
  const FitResult r = run_fit(geom, make_grid(cfg), data, formula, cfg);
  write_fit(f, r, geom.mesh());
  if (cfg.options.detection == DetectionModel::threshold) {
    const BufferReport b = check_buffer(geom, r.params, make_grid(cfg), cfg.m_min, cfg.buffer_threshold);
    write_text(out_path(f, "buffer.json"), buffer_json(b, geom.mesh()));
    if (!b.pass) progress("warning: buffer check failed at the estimate, max p. " + format_number(b.max_probability));
  }
  return 0;
}

ScenarioSpec scenario_spec(const RunConfig& cfg) {
  const auto& sim = cfg.simulation;
  ScenarioSpec spec;
  if (sim.scenario != 0) {
    spec = synthetic_scenario(sim.scenario, cfg.seed);
  } else {
    spec.name = "custom";
    spec.formula = sim.truth_formula;
    spec.standardize = false;
    spec.sim.truth = *sim.truth;
    spec.sim.truth.det.t_r = cfg.t_r;
    spec.sim.options = sim.truth_options;
    spec.sim.truth.sl.fixed = sim.truth_options.source_level == SourceLevelMode::fixed;
    spec.sim.m_min = cfg.m_min;
    spec.sim.period = cfg.period;
    spec.sim.seed = cfg.seed;
  }
  spec.sim.uniform_within_cell = sim.uniform_within_cell;
  return spec;
}

// Built-in scenarios are parameterized per hectare.
double scenario_area_unit(const RunConfig& cfg) {
  return cfg.simulation.scenario != 0 ? kHectare : cfg.area_unit_m2;
}

int cmd_simulate(const Flags& f) {
  const RunConfig cfg = load(f);
  Survey s = load_survey(cfg);
  const double unit = scenario_area_unit(cfg);
  const SurveyGeometry geom(s.array, s.mesh, unit);
  const ScenarioSpec spec = scenario_spec(cfg);
  const ModelFormula formula = formula_for(spec.formula, geom.mesh());
  const DesignMatrix design = build_design_matrix(formula, geom.mesh(), spec.standardize);
  const double true_n = spec.sim.period * total_abundance(spec.sim.truth.beta, design, geom.mesh(), unit);
  const Simulation sim = simulate(geom, design, spec.sim);

  write_sensors(out_path(f, "sensors.csv"), geom.array());
  write_mesh_csv(out_path(f, "mesh.csv"), geom.mesh());
  const DetectionFiles files = dataset_files(f.out, false);
  write_dataset(sim.data, files);
  write_text(out_path(f, "truth.json"), truth_json(spec, sim, true_n));

  // ready-to-run fit config for the simulated data
  nlohmann::json fc{{"data",
                     {{"sensors", "sensors.csv"},
                      {"mesh", "mesh.csv"},
                      {"detections", "detections.csv"},
                      {"bearings", "bearings.csv"},
                      {"received", "received.csv"}}},
                    {"survey", {{"area_unit_m2", unit}}},
                    {"model",
                     {{"formula", spec.formula},
                      {"source_level", to_string(spec.sim.options.source_level)},
                      {"bearing", to_string(spec.sim.options.bearing)},
                      {"t_r", spec.sim.truth.det.t_r},
                      {"m_min", spec.sim.m_min},
                      {"period", spec.sim.period},
                      {"standardize", spec.standardize}}},
                    {"source_level_grid", {{"lower", cfg.sl_lower}, {"upper", cfg.sl_upper}, {"step", cfg.sl_step}}},
                    {"seed", cfg.seed}};
  write_text(out_path(f, "fit_config.json"), fc.dump(2) + "\n");
  progress(std::to_string(sim.emitted) + " calls emitted, " + std::to_string(sim.data.size()) +
           " multiply detected; true N " + format_number(true_n));
  return 0;
}

int cmd_scenarios(const Flags& f) {
  const RunConfig cfg = load(f);
  Survey s = load_survey(cfg);
  const SurveyGeometry geom(s.array, s.mesh, scenario_area_unit(cfg));
  const ScenarioSpec spec = scenario_spec(cfg);
  std::vector<AnalysisModel> models;
  try {
    for (char c : cfg.simulation.models) models.push_back(parse_analysis_model(std::string(1, c)));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("simulation.models: ") + e.what());
  }
  const SourceLevelGrid grid = make_grid(cfg);
  FitConfig fc = fit_config(cfg);
  fc.multistart = 0;
  // one model at a time so progress can be reported; replicate datasets repeat exactly
  std::vector<ScenarioCell> cells;
  for (AnalysisModel m : models) {
    progress("scenario " + spec.name + ", model " + to_string(m) + ": " +
             std::to_string(cfg.simulation.replicates) + " replicates");
    auto c = run_scenario(geom, grid, spec, {m}, cfg.simulation.replicates, fc);
    progress("  RB " + format_number(c.front().relative_bias) + ", CV " + format_number(c.front().cv) +
             ", non-converged " + std::to_string(c.front().non_converged));
    cells.push_back(std::move(c.front()));
  }
  write_metrics_csv(out_path(f, "metrics.csv"), cells);
  write_scenario_replicates_csv(out_path(f, "replicates.csv"), cells);
  return 0;
}

int cmd_bootstrap(const Flags& f) {
  const RunConfig cfg = load(f);
  if (cfg.options.detection != DetectionModel::threshold) {
    throw ConfigError("bootstrap supports the threshold detection model");
  }
  Survey s = load_survey(cfg);
  const SurveyGeometry geom(s.array, s.mesh, cfg.area_unit_m2);
  write_mesh_csv(out_path(f, "mesh.csv"), geom.mesh());
  const Dataset data = load_data(cfg, f, geom.sensors());
  const ModelFormula formula = formula_for(cfg.formula, geom.mesh());
  const SourceLevelGrid grid = make_grid(cfg);
  progress("fitting " + to_string(formula));
  const FitResult base = run_fit(geom, grid, data, formula, cfg);
  write_fit(f, base, geom.mesh());
  if (!base.converged) throw NumericalError("base fit did not converge: " + base.message);
  progress("refitting " + std::to_string(cfg.bootstrap_replicates) + " bootstrap replicates");
  const auto reps = bootstrap(geom, grid, data, formula, fit_config(cfg), base, cfg.bootstrap_replicates, cfg.seed,
                              cfg.bootstrap_start_at_base);
  std::vector<std::string> names = base.names;
  write_bootstrap_replicates_csv(out_path(f, "bootstrap_replicates.csv"), names, reps);
  const BootstrapSummary summary = summarize(base, reps);
  write_text(out_path(f, "bootstrap_summary.json"), bootstrap_summary_json(summary));
  write_qcd_csv(out_path(f, "qcd.csv"), geom.mesh(), summary.qcd);
  progress(std::to_string(summary.converged) + " replicates converged");
  return 0;
}

int cmd_select(const Flags& f) {
  const RunConfig cfg = load(f);
  if (cfg.options.detection != DetectionModel::threshold) {
    throw ConfigError("select supports the threshold detection model");
  }
  if (cfg.formulas.empty()) throw ConfigError("model.formulas is required for select");
  Survey s = load_survey(cfg);
  const SurveyGeometry geom(s.array, s.mesh, cfg.area_unit_m2);
  const Dataset data = load_data(cfg, f, geom.sensors());
  const auto candidates = read_formula_list(cfg.formulas);
  progress("fitting " + std::to_string(candidates.size()) + " candidate models");
  const auto rows = model_select(geom, make_grid(cfg), data, candidates, fit_config(cfg));
  write_selection_csv(out_path(f, "selection.csv"), rows);
  if (rows.empty() || !rows.front().converged) throw NumericalError("no candidate model converged");
  progress("best: " + rows.front().formula + " (AIC " + format_number(rows.front().aic) + ")");
  return 0;
}

int cmd_check_buffer(const Flags& f) {
  const RunConfig cfg = load(f);
  Survey s = load_survey(cfg);
  const SurveyGeometry geom(s.array, s.mesh, cfg.area_unit_m2);
  ModelParams p = cfg.start.value_or(ModelParams{});
  p.det.t_r = cfg.t_r;
  p.sl.fixed = cfg.options.source_level == SourceLevelMode::fixed;
  const BufferReport b = check_buffer(geom, p, make_grid(cfg), cfg.m_min, cfg.buffer_threshold);
  write_text(out_path(f, "buffer.json"), buffer_json(b, geom.mesh()));
  progress(std::string(b.pass ? "pass" : "fail") + ", max boundary p. " + format_number(b.max_probability));
  return 0;
}

int report_error(int code, const char* kind, const std::string& message) {
  std::cerr << nlohmann::json{{"error", kind}, {"exit_code", code}, {"message", message}}.dump() << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acoustic spatial capture-recapture: call density and abundance from multi-sensor detections"};
  app.require_subcommand(1);
  app.footer("Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.\n\n" + config_help());

  Flags flags;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "JSON run configuration (defaults apply when omitted)");
    sub->add_option("--out", flags.out, "output directory")->capture_default_str();
    sub->add_option("--threads", flags.threads, "worker threads, overrides the config");
    sub->add_option("--seed", flags.seed, "random seed, overrides the config");
  };

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Flags&);
  };
  const Command commands[] = {
      {"fit", "fit the density model; writes fit.json, density.csv, mesh.csv, truncation.json", cmd_fit},
      {"simulate", "simulate one dataset; writes detection CSVs, truth.json and fit_config.json", cmd_simulate},
      {"scenarios", "simulation study; writes metrics.csv and replicates.csv", cmd_scenarios},
      {"bootstrap", "nonparametric bootstrap; writes bootstrap_replicates.csv, bootstrap_summary.json, qcd.csv",
       cmd_bootstrap},
      {"select", "fit the candidate list and rank by AIC; writes selection.csv", cmd_select},
      {"check-buffer", "boundary detection probability at model.start; writes buffer.json", cmd_check_buffer},
  };
  int (*chosen)(const Flags&) = nullptr;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    sub->callback([&chosen, run = c.run] { chosen = run; });
  }
  bool schema = false;
  app.add_subcommand("config-schema", "print every config key with its type and default as JSON")
      ->callback([&schema] { schema = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (schema) {
      std::cout << config_schema();
      return 0;
    }
    return chosen(flags);
  } catch (const ConfigError& e) {
    return report_error(2, "config", e.what());
  } catch (const FormulaError& e) {
    return report_error(2, "config", e.what());
  } catch (const DataError& e) {
    return report_error(3, "data", e.what());
  } catch (const fs::filesystem_error& e) {
    return report_error(3, "data", e.what());
  } catch (const NumericalError& e) {
    return report_error(4, "numerical", e.what());
  } catch (const std::invalid_argument& e) {
    return report_error(2, "config", e.what());
  } catch (const std::exception& e) {
    return report_error(4, "numerical", e.what());
  }
}
