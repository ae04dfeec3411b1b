#include "ascr/config.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ascr/error.hpp"

namespace ascr {

namespace {

using nlohmann::json;

enum class Kind { string, number, integer, boolean, params };

struct Key {
  const char* path;  // dotted
  Kind kind;
  json fallback;
  const char* help;
};

json params_default() {
  const ModelParams p;
  return json{{"g0", p.det.g0},
              {"beta_r", p.prop.beta_r},
              {"sigma_r", p.prop.sigma_r},
              {"mu_s", p.sl.mu_s},
              {"sigma_s", p.sl.sigma_s},
              {"kappa", p.bearing.kappa},
              {"delta_kappa", p.bearing.delta_kappa},
              {"psi_kappa", p.bearing.psi_kappa},
              {"theta_U", p.jan.theta_U},
              {"theta_R", p.jan.theta_R},
              {"theta_I", p.jan.theta_I},
              {"beta", json::array()}};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> k{
      {"data.sensors", Kind::string, "", "sensor positions CSV (sensor_id,easting,northing)"},
      {"data.covariates", Kind::string, "", "covariate grid CSV (easting,northing,<covariates>)"},
      {"data.mesh", Kind::string, "", "precomputed mesh CSV; replaces the covariate grid and mesh settings"},
      {"data.detections", Kind::string, "", "detection matrix CSV, n x K of 0/1"},
      {"data.bearings", Kind::string, "", "bearing CSV in degrees, empty where not detected"},
      {"data.received", Kind::string, "", "received-level CSV in dB, empty where not detected"},
      {"data.call_noise", Kind::string, "", "per-call noise CSV in dB (SNR model)"},
      {"data.noise_sample", Kind::string, "", "noise snapshot CSV in dB (SNR model)"},
      {"survey.synthetic", Kind::boolean, false, "use the built-in six-sensor survey instead of data.sensors"},
      {"survey.sea_only", Kind::boolean, false, "synthetic survey: keep only cells with positive depth"},
      {"survey.area_unit_m2", Kind::number, 1e6, "area unit of the density surface in square meters"},
      {"model.formula", Kind::string, "D ~ 1", "density formula"},
      {"model.formulas", Kind::string, "", "candidate formula list file for select"},
      {"model.source_level", Kind::string, "variable", "variable or fixed source level"},
      {"model.bearing", Kind::string, "mixture", "bearing error model: mixture, single or none"},
      {"model.detection", Kind::string, "threshold", "detection model: threshold or snr"},
      {"model.t_r", Kind::number, 96.0, "received-level truncation threshold, dB"},
      {"model.m_min", Kind::integer, 2, "minimum number of detecting sensors"},
      {"model.period", Kind::number, 1.0, "study period T"},
      {"model.standardize", Kind::boolean, true, "standardize density covariates before fitting"},
      {"model.start", Kind::params, nullptr, "start values (real scale); omitted keys use defaults"},
      {"source_level_grid.lower", Kind::number, 100.0, "lowest source-level node, dB"},
      {"source_level_grid.upper", Kind::number, 220.0, "highest source-level node, dB"},
      {"source_level_grid.step", Kind::number, 3.0, "source-level node spacing, dB"},
      {"mesh.inner_radius", Kind::number, 10000.0, "fine-mesh radius around sensors, m"},
      {"mesh.inner_spacing", Kind::number, 2500.0, "fine-mesh cell side, m"},
      {"mesh.outer_radius", Kind::number, 50000.0, "mesh extent from the nearest sensor, m"},
      {"mesh.outer_spacing", Kind::number, 5000.0, "coarse-mesh cell side, m"},
      {"optimizer.max_iterations", Kind::integer, 200, "maximum quasi-Newton iterations"},
      {"optimizer.rel_tol", Kind::number, 1e-8, "relative log-likelihood change for convergence"},
      {"optimizer.grad_tol", Kind::number, 1e-4, "gradient infinity norm for convergence"},
      {"optimizer.multistart", Kind::integer, 0, "extra jittered starts"},
      {"optimizer.jitter_sd", Kind::number, 0.5, "link-scale jitter of extra starts"},
      {"bootstrap.replicates", Kind::integer, 999, "bootstrap replicates B"},
      {"bootstrap.start_at_base", Kind::boolean, true, "start each replicate at the base estimate"},
      {"buffer.threshold", Kind::number, 0.001, "largest allowed boundary detection probability"},
      {"simulation.scenario", Kind::integer, 1, "1 variable or 2 fixed source level; 0 uses simulation.truth"},
      {"simulation.truth", Kind::params, nullptr, "generating parameters when scenario is 0"},
      {"simulation.truth_formula", Kind::string, "D ~ 1", "density formula of simulation.truth"},
      {"simulation.truth_source_level", Kind::string, "variable", "source-level mode of simulation.truth"},
      {"simulation.truth_bearing", Kind::string, "mixture", "bearing model of simulation.truth"},
      {"simulation.replicates", Kind::integer, 30, "replicates per scenario"},
      {"simulation.models", Kind::string, "abcde", "analysis models to fit (letters a-e)"},
      {"simulation.uniform_within_cell", Kind::boolean, false, "place simulated calls uniformly in cells"},
      {"seed", Kind::integer, 1, "base random seed"},
      {"threads", Kind::integer, 1, "worker threads per likelihood evaluation"},
  };
  return k;
}

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::string:
      return "string";
    case Kind::number:
      return "number";
    case Kind::integer:
      return "integer";
    case Kind::boolean:
      return "boolean";
    case Kind::params:
      return "object";
  }
  return "";
}

const Key* find_key(const std::string& path) {
  for (const auto& k : keys()) {
    if (path == k.path) return &k;
  }
  return nullptr;
}

bool is_section(const std::string& name) {
  const std::string prefix = name + ".";
  for (const auto& k : keys()) {
    if (std::string(k.path).rfind(prefix, 0) == 0) return true;
  }
  return false;
}

bool type_ok(const json& v, Kind kind) {
  switch (kind) {
    case Kind::string:
      return v.is_string();
    case Kind::number:
      return v.is_number();
    case Kind::integer:
      return v.is_number_integer();
    case Kind::boolean:
      return v.is_boolean();
    case Kind::params:
      return v.is_object();
  }
  return false;
}

ModelParams parse_params(const json& obj, const std::string& where) {
  static const std::vector<std::string> names{"g0",        "beta_r",      "sigma_r",   "mu_s",
                                              "sigma_s",   "kappa",       "delta_kappa", "psi_kappa",
                                              "theta_U",   "theta_R",     "theta_I",   "beta"};
  for (const auto& [key, value] : obj.items()) {
    if (std::find(names.begin(), names.end(), key) == names.end()) {
      throw ConfigError(where + ": unknown parameter '" + key + "'");
    }
    if (key == "beta") {
      if (!value.is_array()) throw ConfigError(where + ".beta must be an array of numbers");
      for (const auto& b : value) {
        if (!b.is_number()) throw ConfigError(where + ".beta must be an array of numbers");
      }
    } else if (!value.is_number()) {
      throw ConfigError(where + "." + key + " must be a number");
    }
  }
  ModelParams p;
  auto num = [&](const char* name, double& out) {
    if (obj.contains(name)) out = obj.at(name).get<double>();
  };
  num("g0", p.det.g0);
  num("beta_r", p.prop.beta_r);
  num("sigma_r", p.prop.sigma_r);
  num("mu_s", p.sl.mu_s);
  num("sigma_s", p.sl.sigma_s);
  num("kappa", p.bearing.kappa);
  num("delta_kappa", p.bearing.delta_kappa);
  num("psi_kappa", p.bearing.psi_kappa);
  num("theta_U", p.jan.theta_U);
  num("theta_R", p.jan.theta_R);
  num("theta_I", p.jan.theta_I);
  if (obj.contains("beta")) p.beta = obj.at("beta").get<std::vector<double>>();
  return p;
}

void check_keys(const json& node, const std::string& prefix) {
  for (const auto& [name, value] : node.items()) {
    const std::string path = prefix.empty() ? name : prefix + "." + name;
    if (const Key* k = find_key(path)) {
      if (!type_ok(value, k->kind)) {
        throw ConfigError("config key '" + path + "' must be " + std::string(kind_name(k->kind)));
      }
    } else if (is_section(path)) {
      if (!value.is_object()) throw ConfigError("config key '" + path + "' must be an object");
      check_keys(value, path);
    } else {
      throw ConfigError("unknown config key '" + path + "'");
    }
  }
}

class Reader {
 public:
  explicit Reader(const json& doc) : doc_(doc) {}

  const json& get(const std::string& path) const {
    const json* node = &doc_;
    std::size_t start = 0;
    while (true) {
      const auto dot = path.find('.', start);
      const std::string part = path.substr(start, dot - start);
      if (!node->contains(part)) return find_key(path)->fallback;
      node = &node->at(part);
      if (dot == std::string::npos) return *node;
      start = dot + 1;
    }
  }
  bool has(const std::string& path) const { return !get(path).is_null(); }
  std::string str(const std::string& path) const { return get(path).get<std::string>(); }
  double num(const std::string& path) const { return get(path).get<double>(); }
  bool flag(const std::string& path) const { return get(path).get<bool>(); }
  long long integer(const std::string& path) const { return get(path).get<long long>(); }

 private:
  const json& doc_;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

int bounded_int(const Reader& r, const std::string& path, long long lo, long long hi) {
  const long long v = r.integer(path);
  require(v >= lo && v <= hi, path + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return static_cast<int>(v);
}

double positive(const Reader& r, const std::string& path) {
  const double v = r.num(path);
  require(v > 0.0, path + " must be positive");
  return v;
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  require(doc.is_object(), "config must be a JSON object");
  check_keys(doc, "");
  const Reader r(doc);

  RunConfig c;
  c.data.sensors = r.str("data.sensors");
  c.data.covariates = r.str("data.covariates");
  c.data.mesh = r.str("data.mesh");
  c.data.detections = r.str("data.detections");
  c.data.bearings = r.str("data.bearings");
  c.data.received = r.str("data.received");
  c.data.call_noise = r.str("data.call_noise");
  c.data.noise_sample = r.str("data.noise_sample");
  c.synthetic_survey = r.flag("survey.synthetic");
  c.sea_only = r.flag("survey.sea_only");
  c.area_unit_m2 = positive(r, "survey.area_unit_m2");

  c.formula = r.str("model.formula");
  c.formulas = r.str("model.formulas");
  c.options.source_level = parse_source_level_mode(r.str("model.source_level"));
  c.options.bearing = parse_bearing_model(r.str("model.bearing"));
  c.options.detection = parse_detection_model(r.str("model.detection"));
  c.t_r = r.num("model.t_r");
  c.m_min = bounded_int(r, "model.m_min", 1, 64);
  c.period = positive(r, "model.period");
  c.standardize = r.flag("model.standardize");
  if (r.has("model.start")) c.start = parse_params(r.get("model.start"), "model.start");

  c.sl_lower = r.num("source_level_grid.lower");
  c.sl_upper = r.num("source_level_grid.upper");
  c.sl_step = positive(r, "source_level_grid.step");
  require(c.sl_lower < c.sl_upper, "source_level_grid.lower must be below source_level_grid.upper");

  c.mesh.inner_radius = positive(r, "mesh.inner_radius");
  c.mesh.inner_spacing = positive(r, "mesh.inner_spacing");
  c.mesh.outer_radius = positive(r, "mesh.outer_radius");
  c.mesh.outer_spacing = positive(r, "mesh.outer_spacing");
  require(c.mesh.inner_radius < c.mesh.outer_radius, "mesh.inner_radius must be below mesh.outer_radius");

  c.max_iterations = bounded_int(r, "optimizer.max_iterations", 1, 1000000);
  c.rel_tol = positive(r, "optimizer.rel_tol");
  c.grad_tol = positive(r, "optimizer.grad_tol");
  c.multistart = bounded_int(r, "optimizer.multistart", 0, 1000);
  c.jitter_sd = positive(r, "optimizer.jitter_sd");

  c.bootstrap_replicates = bounded_int(r, "bootstrap.replicates", 1, 1000000);
  c.bootstrap_start_at_base = r.flag("bootstrap.start_at_base");
  c.buffer_threshold = r.num("buffer.threshold");
  require(c.buffer_threshold > 0.0 && c.buffer_threshold <= 1.0, "buffer.threshold must lie in (0, 1]");

  auto& sim = c.simulation;
  sim.scenario = bounded_int(r, "simulation.scenario", 0, 2);
  if (r.has("simulation.truth")) sim.truth = parse_params(r.get("simulation.truth"), "simulation.truth");
  require(sim.scenario != 0 || sim.truth.has_value(), "simulation.scenario 0 needs simulation.truth");
  sim.truth_formula = r.str("simulation.truth_formula");
  sim.truth_options.source_level = parse_source_level_mode(r.str("simulation.truth_source_level"));
  sim.truth_options.bearing = parse_bearing_model(r.str("simulation.truth_bearing"));
  sim.replicates = bounded_int(r, "simulation.replicates", 1, 1000000);
  sim.models = r.str("simulation.models");
  require(!sim.models.empty(), "simulation.models must name at least one model");
  for (char m : sim.models) require(m >= 'a' && m <= 'e', "simulation.models may only contain letters a-e");
  sim.uniform_within_cell = r.flag("simulation.uniform_within_cell");

  const long long seed = r.integer("seed");
  require(seed >= 0, "seed must be non-negative");
  c.seed = static_cast<std::uint64_t>(seed);
  c.threads = bounded_int(r, "threads", 1, 1024);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  RunConfig c = parse_config(buf.str());
  // relative data paths are taken from the config file's directory
  const auto base = std::filesystem::path(path).parent_path();
  for (std::string* p : {&c.data.sensors, &c.data.covariates, &c.data.mesh, &c.data.detections, &c.data.bearings,
                         &c.data.received, &c.data.call_noise, &c.data.noise_sample, &c.formulas}) {
    if (!p->empty() && std::filesystem::path(*p).is_relative()) *p = (base / *p).lexically_normal().string();
  }
  return c;
}

std::string config_schema() {
  json out = json::object();
  for (const auto& k : keys()) {
    json entry{{"type", kind_name(k.kind)}, {"description", k.help}};
    entry["default"] = k.kind == Kind::params ? params_default() : k.fallback;
    if (k.kind == Kind::params) entry["optional"] = true;
    out[k.path] = entry;
  }
  return out.dump(2) + "\n";
}

std::string config_help() {
  std::ostringstream out;
  out << "Config keys (JSON, dotted paths are nested objects):\n";
  for (const auto& k : keys()) {
    out << "  " << k.path << " (" << kind_name(k.kind) << ", default ";
    out << (k.kind == Kind::params ? std::string("none") : k.fallback.dump()) << "): " << k.help << "\n";
  }
  return out.str();
}

}  // namespace ascr
