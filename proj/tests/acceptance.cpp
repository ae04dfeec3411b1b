// Acceptance suite: one PASS/FAIL line per criterion.
//
//   ascr_acceptance <group>...   groups: oracles poisson_binomial normalization
//                                snr_bridge aic_selection determinism simulation
//                                case_study (or "all")
//
// Exit status is 0 when every criterion passes, 1 otherwise, and 77 when the
// case-study data are absent (so ctest reports a skip).

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <nlohmann/json.hpp>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ascr/buffer.hpp"
#include "ascr/fit.hpp"
#include "ascr/numerics.hpp"
#include "ascr/observation.hpp"
#include "ascr/simulation.hpp"
#include "ascr/snr.hpp"
#include "ascr/synthetic.hpp"
#include "oracles.hpp"

using namespace ascr;
namespace fs = std::filesystem;
using nlohmann::json;
using oracle::rel_diff;

namespace {

constexpr int kSkip = 77;
constexpr double kInf = std::numeric_limits<double>::infinity();

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ascr_acceptance_" + std::to_string(::getpid()) + "_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(ASCR_CLI) + " " + args + " > /dev/null 2>> " + log.string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------- oracles

void oracles() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  int instances = 0;
  for (int rep = 0; rep < 240; ++rep) {
    oracle::TinyShape s;
    s.sensors = 2 + rep % 2;
    s.cells = 1 + rep % 4;
    s.nodes = 1 + (rep / 4) % 3;
    s.calls = rep % 4;
    s.m_min = rep % 5 == 0 ? 1 : 2;
    s.options.bearing = static_cast<BearingModel>(rep % 3);
    if (rep % 7 == 3) s.options.source_level = SourceLevelMode::fixed;
    const auto t = oracle::random_tiny(rng, s);
    const Likelihood lik(*t.geom, *t.design, *t.grid, t.data, t.options);
    const auto want = oracle::threshold_likelihood(*t.geom, *t.design, *t.grid, t.data, t.params, t.options);
    const auto got = lik.evaluate(t.params);
    for (double d : {rel_diff(got.conditional, want.conditional), rel_diff(got.full, want.full),
                     rel_diff(lik.lambda_detected(t.params), want.lambda),
                     rel_diff(lik.expected_singletons(t.params), want.singletons)}) {
      worst = std::max(worst, d);
    }
    ++instances;
  }
  double worst_snr = 0.0;
  int snr_instances = 0;
  for (int rep = 0; rep < 36; ++rep) {
    oracle::TinyShape s;
    s.sensors = 2 + rep % 2;
    s.cells = 1 + rep % 4;
    s.nodes = 1 + rep % 3;
    s.calls = 1 + rep % 3;
    s.with_noise = true;
    s.options.bearing = rep % 3 == 0 ? BearingModel::mixture : BearingModel::single;
    const auto t = oracle::random_tiny(rng, s);
    const SnrLikelihood lik(*t.geom, *t.design, *t.grid, t.data, t.noise, t.options);
    const auto want = oracle::snr_likelihood(*t.geom, *t.design, *t.grid, t.data, t.noise, t.params, t.options);
    const auto got = lik.evaluate(t.params);
    for (double d : {rel_diff(got.full, want.full), rel_diff(got.conditional, want.conditional),
                     rel_diff(got.lambda, want.lambda), rel_diff(lik.expected_singletons(t.params), want.singletons)}) {
      worst_snr = std::max(worst_snr, d);
    }
    ++snr_instances;
  }
  report(worst <= 1e-10 && worst_snr <= 1e-8, "oracle_equivalence",
         fmt("%d threshold instances max rel diff %.2e (tol 1e-10); %d SNR instances max rel diff %.2e (tol 1e-8)",
             instances, worst, snr_instances, worst_snr));
}

// ------------------------------------------------------- poisson binomial

void poisson_binomial() {
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int rep = 0; rep < 1000; ++rep) {
    const int k = 1 + rep % 10;
    std::vector<double> p(static_cast<std::size_t>(k));
    // mix interior values with near-certain and near-impossible sensors
    for (double& x : p) {
      const double v = u(rng);
      x = v < 0.1 ? 1e-9 * u(rng) : v > 0.9 ? 1.0 - 1e-9 * u(rng) : u(rng);
    }
    const auto counts = oracle::enumerate_counts(p);
    const auto pmf = poisson_binomial_pmf(p, 1);
    worst = std::max(worst, std::abs(pmf[1] - counts[1]));
    for (int m = 1; m <= k; ++m) worst = std::max(worst, std::abs(poisson_binomial_tail(p, m) - oracle::enumerate_tail(p, m)));
  }
  // p. over real geometry
  double worst_geom = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    const int k = 2 + rep % 9;
    std::vector<Point> pts;
    for (int j = 0; j < k; ++j) pts.push_back({4000.0 * u(rng), 4000.0 * u(rng)});
    const SensorArray array(pts);
    const Point x{-8000.0 + 20000.0 * u(rng), -8000.0 + 20000.0 * u(rng)};
    const double s = 140.0 + 40.0 * u(rng);
    const DetectionParams det{0.2 + 0.8 * u(rng), 96.0};
    const PropagationParams prop{15.0 + 5.0 * u(rng), 1.0 + 4.0 * u(rng)};
    const auto p = detect_probs(array, x, s, det, prop);
    for (int m = 1; m <= k; ++m) {
      worst_geom = std::max(worst_geom, std::abs(p_dot_min(array, x, s, m, det, prop) - oracle::enumerate_tail(p, m)));
    }
  }
  report(worst <= 1e-12 && worst_geom <= 1e-12, "poisson_binomial",
         fmt("1000 p-vectors K <= 10: max abs diff %.2e; 200 geometric p. checks: %.2e (tol 1e-12)", worst,
             worst_geom));
}

// ---------------------------------------------------------- normalization

void normalization() {
  using boost::math::quadrature::gauss_kronrod;
  std::mt19937_64 rng(303);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_r = 0.0, worst_b = 0.0, worst_s = 0.0;
  boost::math::quadrature::exp_sinh<double> tail;
  for (int rep = 0; rep < 100; ++rep) {
    const DetectionParams det{0.5, 90.0 + 10.0 * u(rng)};
    const PropagationParams prop{15.0, 1.0 + 5.0 * u(rng)};
    const double e = det.t_r - 6.0 + 20.0 * u(rng);
    auto fr = [&](double r) { return std::exp(received_level_logdensity(r, e, det, prop)); };
    const double upper = std::max(det.t_r, e) + 40.0 * prop.sigma_r;
    worst_r = std::max(worst_r, std::abs(gauss_kronrod<double, 61>::integrate(fr, det.t_r, upper, 15, 1e-12) - 1.0));

    const BearingParams b{3.0 * u(rng), 60.0 * u(rng), u(rng)};
    auto fb = [&](double y) { return std::exp(bearing_mixture_logdensity(y, b)); };
    worst_b = std::max(worst_b, std::abs(gauss_kronrod<double, 61>::integrate(fb, -std::numbers::pi, std::numbers::pi, 20, 1e-12) - 1.0));

    const SourceLevelPrior prior{100.0 * u(rng), 1.0 + 30.0 * u(rng), false};
    auto fs = [&](double s) { return std::exp(source_level_logdensity(s, prior)); };
    worst_s = std::max(worst_s, std::abs(tail.integrate(fs, 0.0, kInf) - 1.0));
  }
  report(std::max({worst_r, worst_b, worst_s}) <= 1e-6, "density_normalization",
         fmt("100 draws: received level %.2e, bearing mixture %.2e, source level %.2e (tol 1e-6)", worst_r, worst_b,
             worst_s));
}

// -------------------------------------------------------------- snr bridge

void snr_bridge() {
  std::mt19937_64 rng(404);
  double worst = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    oracle::TinyShape s;
    s.sensors = 2 + rep % 2;
    s.cells = 1 + rep % 4;
    s.nodes = 1 + rep % 3;
    s.with_noise = true;
    s.options.bearing = BearingModel::single;
    auto t = oracle::random_tiny(rng, s);
    t.params.jan = {t.params.det.g0, kInf, 2.0};
    t.data.noise.assign(t.data.omega.size(), t.params.det.t_r);
    t.noise.values.assign(t.noise.sensors, t.params.det.t_r);
    const auto snr = SnrLikelihood(*t.geom, *t.design, *t.grid, t.data, t.noise, t.options).evaluate(t.params);
    const auto thr = Likelihood(*t.geom, *t.design, *t.grid, t.data, t.options).evaluate(t.params);
    worst = std::max({worst, rel_diff(snr.full, thr.full), rel_diff(snr.lambda, thr.lambda)});
  }
  // a full simulated survey
  const SensorArray array = synthetic_array();
  const SurveyGeometry geom(array, synthetic_mesh(array, synthetic_mesh_spec()), kHectare);
  const ScenarioSpec spec = synthetic_scenario(2, 5);
  const auto design = build_design_matrix(parse_formula(spec.formula, geom.mesh().covariate_names()), geom.mesh(), false);
  Dataset data = simulate(geom, design, spec.sim).data;
  data.noise.assign(data.omega.size(), spec.sim.truth.det.t_r);
  ModelParams params = spec.sim.truth;
  params.jan = {params.det.g0, kInf, 2.0};
  const auto grid = synthetic_source_level_grid();
  const NoiseSample noise{geom.sensors(), std::vector<double>(geom.sensors(), spec.sim.truth.det.t_r)};
  const auto snr = SnrLikelihood(geom, design, grid, data, noise, spec.sim.options).evaluate(params);
  const auto thr = Likelihood(geom, design, grid, data, spec.sim.options).evaluate(params);
  const double survey = rel_diff(snr.full, thr.full);
  report(std::max(worst, survey) <= 1e-6, "snr_limit_bridge",
         fmt("step-limit Janoschek vs threshold log L: 20 small instances max rel diff %.2e, %zu-call survey %.2e "
             "(tol 1e-6)",
             worst, data.size(), survey));
}

// ---------------------------------------------------------- aic selection

void aic_selection() {
  const double a33 = aic(19, -2928.2775);
  const double a9 = aic(9, -3190.392);
  const bool identity = std::abs(a33 - 5894.555) <= 1e-9 && std::abs(a9 - 6398.784) <= 1e-9 &&
                        aic(20, -2928.2775) - a33 == 2.0;

  const SensorArray array = synthetic_array();
  const SurveyGeometry geom(array, synthetic_mesh(array, synthetic_mesh_spec(), true), kHectare);
  const ScenarioSpec spec = synthetic_scenario(2, 11);
  const auto design = build_design_matrix(parse_formula(spec.formula, geom.mesh().covariate_names()), geom.mesh(), false);
  const Dataset data = simulate(geom, design, spec.sim).data;
  FitConfig cfg;
  cfg.options = spec.sim.options;
  cfg.t_r = spec.sim.truth.det.t_r;
  cfg.standardize = true;
  const auto candidates = read_formula_list(ASCR_MODELS35);
  bool plumbing = candidates.size() == 35;
  std::string error;
  std::vector<SelectionRow> rows;
  try {
    rows = model_select(geom, synthetic_source_level_grid(), data, candidates, cfg);
  } catch (const std::exception& e) {
    plumbing = false;
    error = e.what();
  }
  int converged = 0;
  double prev = -kInf;
  for (const auto& r : rows) {
    if (!r.converged) continue;
    ++converged;
    plumbing = plumbing && r.rank == converged && r.aic >= prev && std::isfinite(r.aic) && r.delta_aic >= 0.0 &&
               std::abs(r.aic - (2.0 * r.k - 2.0 * r.loglik)) <= 1e-9 * std::abs(r.aic);
    prev = r.aic;
  }
  plumbing = plumbing && rows.size() == 35 && converged > 0 && rows.front().delta_aic == 0.0;
  report(identity && plumbing, "aic_selection",
         fmt("AIC(19, -2928.2775) = %.6f, AIC(9, -3190.392) = %.6f; %zu of 35 candidates fitted on %zu simulated "
             "calls, %d converged and ranked, best '%s'%s",
             a33, a9, rows.size(), data.size(), converged, rows.empty() ? "" : rows.front().formula.c_str(),
             error.empty() ? "" : (" error: " + error).c_str()));
}

// ------------------------------------------------------------ determinism

void determinism() {
  const fs::path root = scratch("determinism");
  const fs::path log = root / "stderr.txt";
  std::ofstream(root / "sim.json") << R"({"survey": {"synthetic": true, "sea_only": true},
    "simulation": {"scenario": 2}, "source_level_grid": {"lower": 127, "upper": 199}, "seed": 17})";
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    ok = ok && run_cli("simulate --config " + (root / "sim.json").string() + " --out " + dir.string(), log) == 0;
    ok = ok && run_cli("fit --config " + (dir / "fit_config.json").string() + " --out " + (dir / "fit").string(), log) == 0;
  }
  int compared = 0;
  std::string differs;
  for (const char* name : {"detections.csv", "bearings.csv", "received.csv", "sensors.csv", "mesh.csv", "truth.json",
                           "fit/fit.json", "fit/density.csv"}) {
    const std::string a = slurp(root / "a" / name);
    const std::string b = slurp(root / "b" / name);
    if (a.empty() || a != b) differs += std::string(" ") + name;
    ++compared;
  }
  report(ok && differs.empty(), "determinism",
         ok ? fmt("two simulate + fit runs with seed 17: %d files compared byte for byte%s%s", compared,
                  differs.empty() ? ", all identical" : ", differing:", differs.c_str())
            : "CLI run failed, see " + log.string());
  if (ok && differs.empty()) fs::remove_all(root);
}

// ------------------------------------------------------------- simulation

int replicates() {
  const char* env = std::getenv("ASCR_ACCEPTANCE_REPS");
  return env ? std::max(1, std::atoi(env)) : 30;
}

void simulation() {
  const int reps = replicates();
  const SensorArray array = synthetic_array();
  const SurveyGeometry geom(array, synthetic_mesh(array, synthetic_mesh_spec()), kHectare);
  const auto grid = synthetic_source_level_grid();
  const ScenarioSpec s1 = synthetic_scenario(1, 1);
  const ScenarioSpec s2 = synthetic_scenario(2, 1);
  const BufferReport b1 = check_buffer(geom, s1.sim.truth, grid, s1.sim.m_min);
  const BufferReport b2 = check_buffer(geom, s2.sim.truth, grid, s2.sim.m_min);

  const FitConfig cfg;
  std::map<std::string, ScenarioCell> cell;
  for (auto& c : run_scenario(geom, grid, s1, {AnalysisModel::a, AnalysisModel::b, AnalysisModel::c, AnalysisModel::e},
                              reps, cfg)) {
    cell["1" + to_string(c.model)] = std::move(c);
  }
  for (auto& c : run_scenario(geom, grid, s2, {AnalysisModel::e}, reps, cfg)) cell["2" + to_string(c.model)] = std::move(c);

  const bool enough = reps >= 30;
  const auto& a = cell["1a"];
  report(enough && b1.pass && std::abs(a.relative_bias) <= 0.10, "simulation_1a",
         fmt("%d replicates on %zu cells x %zu SL nodes (buffer max p. %.1e): RB %+.3f, CV %.3f, %d non-converged, "
             "true N %.1f",
             reps, geom.cells(), grid.size(), b1.max_probability, a.relative_bias, a.cv, a.non_converged,
             a.true_abundance));

  const auto& b = cell["1b"];
  const auto& c = cell["1c"];
  const auto& e1 = cell["1e"];
  const auto& e2 = cell["2e"];
  const bool dirs = enough && b2.pass && b.relative_bias <= -0.20 && e1.relative_bias >= 1.0 &&
                    e2.relative_bias >= 1.0 && c.cv > a.cv && std::abs(c.relative_bias) <= 0.10;
  report(dirs, "misspecification_directions",
         fmt("1b RB %+.3f (<= -0.20); 1e RB %+.3f, 2e RB %+.3f (>= +1.00); 1c RB %+.3f with CV %.3f vs 1a CV %.3f",
             b.relative_bias, e1.relative_bias, e2.relative_bias, c.relative_bias, c.cv, a.cv));

  double mu = 0.0, br = 0.0;
  int n = 0;
  for (std::size_t r = 0; r < a.fitted.size(); ++r) {
    if (!a.converged[r]) continue;
    mu += a.fitted[r].sl.mu_s;
    br += a.fitted[r].prop.beta_r;
    ++n;
  }
  mu /= n;
  br /= n;
  const double mu_true = s1.sim.truth.sl.mu_s;
  const double br_true = s1.sim.truth.prop.beta_r;
  report(n > 0 && std::abs(mu - mu_true) <= 1.5 && std::abs(br - br_true) <= 1.0, "parameter_recovery",
         fmt("mean over %d fits: mu_s %.2f (truth %.0f, tol 1.5 dB), beta_r %.2f (truth %.0f, tol 1.0)", n, mu, mu_true,
             br, br_true));
}

// ------------------------------------------------------------- case study

// Expects <dir>/config.json: a fit configuration for the site-5 files with
// model.formulas pointing at the candidate list.
int case_study() {
  const char* env = std::getenv("ASCR_CASE_STUDY_DIR");
  const fs::path dir = env ? fs::path(env) : fs::path();
  if (!env || !fs::exists(dir / "config.json")) {
    report(false, "case_study",
           "external site-5 dataset not available (set ASCR_CASE_STUDY_DIR to a directory holding config.json); "
           "not reproducible here, covered by the property suites");
    return kSkip;
  }
  const fs::path root = scratch("case_study");
  const fs::path log = root / "stderr.txt";
  // absolute paths so the derived config can live elsewhere
  json cfg = json::parse(slurp(dir / "config.json"));
  for (const char* key : {"sensors", "covariates", "mesh", "detections", "bearings", "received", "call_noise",
                          "noise_sample"}) {
    if (cfg.contains("data") && cfg["data"].contains(key) && fs::path(cfg["data"][key].get<std::string>()).is_relative()) {
      cfg["data"][key] = (dir / cfg["data"][key].get<std::string>()).string();
    }
  }
  if (cfg.contains("model") && cfg["model"].contains("formulas")) {
    const fs::path f = cfg["model"]["formulas"].get<std::string>();
    if (f.is_relative()) cfg["model"]["formulas"] = (dir / f).string();
  } else {
    cfg["model"]["formulas"] = ASCR_MODELS35;
  }
  std::ofstream(root / "select.json") << cfg.dump(2);
  const bool selected = run_cli("select --config " + (root / "select.json").string() + " --out " + (root / "select").string(), log) == 0;

  const auto candidates = read_formula_list(cfg["model"]["formulas"].get<std::string>());
  std::string best;
  if (selected) {
    std::ifstream in(root / "select" / "selection.csv");
    std::string line;
    std::getline(in, line);
    std::getline(in, line);
    const auto q1 = line.find('"');
    const auto q2 = line.find('"', q1 + 1);
    if (q1 != std::string::npos && q2 != std::string::npos) best = line.substr(q1 + 1, q2 - q1 - 1);
  }
  const bool best_is_33 = candidates.size() >= 33 && best == candidates[32];

  cfg["model"]["formula"] = candidates.size() >= 33 ? candidates[32] : std::string("D ~ 1");
  std::ofstream(root / "boot.json") << cfg.dump(2);
  const bool booted = run_cli("bootstrap --config " + (root / "boot.json").string() + " --out " + (root / "boot").string(), log) == 0;

  std::size_t retained = 0;
  double n_hat = NAN, singletons = NAN, cv = NAN;
  if (booted) {
    retained = json::parse(slurp(root / "boot" / "truncation.json")).at("retained").get<std::size_t>();
    const auto fit = json::parse(slurp(root / "boot" / "fit.json"));
    n_hat = fit.at("abundance").get<double>();
    singletons = fit.at("expected_singletons").get<double>();
    for (const auto& p : json::parse(slurp(root / "boot" / "bootstrap_summary.json")).at("parameters")) {
      if (p.at("name") == "N") cv = p.at("cv_percent").get<double>();
    }
  }
  const bool ok = selected && booted && retained == 443 && best_is_33 && std::abs(n_hat / 5741.39 - 1.0) <= 0.02 &&
                  std::abs(singletons / 570.0 - 1.0) <= 0.05 && std::abs(cv - 10.55) <= 2.0;
  report(ok, "case_study",
         fmt("%zu calls retained (443); best '%s' (model 33: %s); N %.2f (5741.39 +- 2%%); singletons %.1f (570 +- 5%%); "
             "bootstrap CV %.2f%% (10.55 +- 2)",
             retained, best.c_str(), best_is_33 ? "yes" : "no", n_hat, singletons, cv));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  const std::map<std::string, std::function<void()>> groups{
      {"oracles", oracles},           {"poisson_binomial", poisson_binomial}, {"normalization", normalization},
      {"snr_bridge", snr_bridge},     {"aic_selection", aic_selection},       {"determinism", determinism},
      {"simulation", simulation}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  if (wanted.empty() || wanted == std::vector<std::string>{"all"}) {
    wanted = {"oracles",     "poisson_binomial", "normalization", "snr_bridge",
              "aic_selection", "determinism",    "simulation",    "case_study"};
  }
  bool skipped = false;
  for (const auto& g : wanted) {
    try {
      if (g == "case_study") {
        skipped = case_study() == kSkip && wanted.size() == 1;
      } else if (auto it = groups.find(g); it != groups.end()) {
        it->second();
      } else {
        std::fprintf(stderr, "unknown group '%s'\n", g.c_str());
        return 2;
      }
    } catch (const std::exception& e) {
      report(false, g, std::string("exception: ") + e.what());
    }
  }
  if (skipped) return kSkip;
  return failures == 0 ? 0 : 1;
}
