#include "ascr/report.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>

#include "ascr/error.hpp"

namespace ascr {

namespace {

using nlohmann::json;

// NaN and infinities are not JSON numbers
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json numbers(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

json params_json(const ModelParams& p, const ModelOptions& o) {
  json out{{"g0", number(p.det.g0)},
           {"t_r", number(p.det.t_r)},
           {"beta_r", number(p.prop.beta_r)},
           {"sigma_r", number(p.prop.sigma_r)},
           {"mu_s", number(p.sl.mu_s)},
           {"source_level", to_string(o.source_level)},
           {"bearing", to_string(o.bearing)},
           {"detection", to_string(o.detection)},
           {"beta", numbers(p.beta)}};
  if (o.source_level == SourceLevelMode::variable) out["sigma_s"] = number(p.sl.sigma_s);
  if (o.bearing != BearingModel::none) out["kappa"] = number(p.bearing.kappa);
  if (o.bearing == BearingModel::mixture) {
    out["delta_kappa"] = number(p.bearing.delta_kappa);
    out["psi_kappa"] = number(p.bearing.psi_kappa);
  }
  if (o.detection == DetectionModel::snr) {
    out["theta_U"] = number(p.jan.theta_U);
    out["theta_R"] = number(p.jan.theta_R);
    out["theta_I"] = number(p.jan.theta_I);
  }
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path + "'");
  return out;
}

}  // namespace

std::string fit_json(const FitResult& fit) {
  json estimates = json::array();
  for (std::size_t i = 0; i < fit.names.size(); ++i) {
    estimates.push_back({{"name", fit.names[i]},
                         {"link", to_string(fit.links[i])},
                         {"link_estimate", number(fit.link_estimates[i])},
                         {"estimate", number(fit.real_estimates[i])}});
  }
  json density = json::array();
  for (std::size_t i = 0; i < fit.beta_names.size(); ++i) {
    density.push_back({{"term", fit.beta_names[i]},
                       {"design_scale", number(fit.params.beta[i])},
                       {"original_scale", number(fit.beta_original[i])}});
  }
  json out{{"formula", fit.formula},
           {"model", params_json(fit.params, fit.options)},
           {"estimates", estimates},
           {"density_coefficients", density},
           {"loglik", number(fit.loglik)},
           {"k", fit.k},
           {"aic", number(fit.aic)},
           {"abundance", number(fit.abundance)},
           {"lambda", number(fit.lambda)},
           {"expected_singletons", number(fit.expected_singletons)},
           {"converged", fit.converged},
           {"iterations", fit.iterations},
           {"evaluations", fit.evaluations},
           {"message", fit.message}};
  return out.dump(2) + "\n";
}

std::string timing_json(double runtime_seconds, int evaluations) {
  return json{{"runtime_seconds", runtime_seconds}, {"evaluations", evaluations}}.dump(2) + "\n";
}

std::string truncation_json(const TruncationReport& r) {
  return json{{"raw_calls", r.raw_calls},
              {"detections_removed", r.detections_removed},
              {"dropped_empty", r.dropped_empty},
              {"dropped_singletons", r.dropped_singletons},
              {"retained", r.retained}}
             .dump(2) +
         "\n";
}

std::string truth_json(const ScenarioSpec& spec, const Simulation& sim, double true_abundance) {
  json calls = json::array();
  for (const auto& c : sim.latent) {
    calls.push_back({{"cell_id", c.cell + 1},
                     {"easting", c.position.easting},
                     {"northing", c.position.northing},
                     {"source_level", c.source_level}});
  }
  json out{{"scenario", spec.name},
           {"formula", spec.formula},
           {"standardize", spec.standardize},
           {"truth", params_json(spec.sim.truth, spec.sim.options)},
           {"m_min", spec.sim.m_min},
           {"period", spec.sim.period},
           {"seed", spec.sim.seed},
           {"true_abundance", true_abundance},
           {"emitted_calls", sim.emitted},
           {"detected_calls", sim.data.size()},
           {"latent", calls}};
  return out.dump(2) + "\n";
}

std::string buffer_json(const BufferReport& r, const Mesh& mesh) {
  json cells = json::array();
  for (std::size_t i = 0; i < r.cells.size(); ++i) {
    const auto& c = mesh[r.cells[i]];
    cells.push_back({{"cell_id", r.cells[i] + 1},
                     {"easting", c.centroid.easting},
                     {"northing", c.centroid.northing},
                     {"probability", number(r.probabilities[i])},
                     {"pass", static_cast<bool>(r.cell_pass[i])}});
  }
  return json{{"pass", r.pass}, {"threshold", r.threshold}, {"max_probability", number(r.max_probability)},
              {"boundary_cells", cells}}
             .dump(2) +
         "\n";
}

void write_metrics_csv(const std::string& path, const std::vector<ScenarioCell>& cells) {
  auto out = open_out(path);
  out << "scenario,model,true_abundance,replicates,converged,non_converged,relative_bias,cv,mean_detected\n";
  for (const auto& c : cells) {
    out << c.scenario << ',' << to_string(c.model) << ',' << format_number(c.true_abundance) << ','
        << c.estimates.size() << ',' << (c.estimates.size() - static_cast<std::size_t>(c.non_converged)) << ','
        << c.non_converged << ',' << format_number(c.relative_bias) << ',' << format_number(c.cv) << ','
        << format_number(c.mean_detected) << '\n';
  }
}

void write_scenario_replicates_csv(const std::string& path, const std::vector<ScenarioCell>& cells) {
  auto out = open_out(path);
  out << "scenario,model,replicate,converged,estimate,relative_error\n";
  for (const auto& c : cells) {
    for (std::size_t r = 0; r < c.estimates.size(); ++r) {
      const double e = c.estimates[r];
      out << c.scenario << ',' << to_string(c.model) << ',' << (r + 1) << ',' << (c.converged[r] ? 1 : 0) << ','
          << format_number(e) << ',' << format_number((e - c.true_abundance) / c.true_abundance) << '\n';
    }
  }
}

void write_selection_csv(const std::string& path, const std::vector<SelectionRow>& rows) {
  auto out = open_out(path);
  out << "rank,formula,k,loglik,aic,delta_aic,abundance,converged,message\n";
  for (const auto& r : rows) {
    std::string message = r.message;
    for (char& ch : message) {
      if (ch == ',' || ch == '\n') ch = ';';
    }
    out << r.rank << ",\"" << r.formula << "\"," << r.k << ',' << format_number(r.loglik) << ','
        << format_number(r.aic) << ',' << format_number(r.delta_aic) << ',' << format_number(r.abundance) << ','
        << (r.converged ? 1 : 0) << ',' << message << '\n';
  }
}

void write_bootstrap_replicates_csv(const std::string& path, const std::vector<std::string>& names,
                                    const std::vector<BootstrapReplicate>& replicates) {
  auto out = open_out(path);
  out << "replicate,converged";
  for (const auto& n : names) out << ',' << n;
  out << ",N\n";
  for (std::size_t b = 0; b < replicates.size(); ++b) {
    const auto& r = replicates[b];
    out << (b + 1) << ',' << (r.converged ? 1 : 0);
    for (std::size_t i = 0; i < names.size(); ++i) {
      out << ',' << (i < r.real_estimates.size() ? format_number(r.real_estimates[i]) : std::string());
    }
    out << ',' << (r.real_estimates.empty() ? std::string() : format_number(r.abundance)) << '\n';
  }
}

std::string bootstrap_summary_json(const BootstrapSummary& s) {
  json params = json::array();
  for (const auto& p : s.params) {
    params.push_back({{"name", p.name},
                      {"estimate", number(p.estimate)},
                      {"se", number(p.se)},
                      {"cv_percent", number(p.cv_percent)},
                      {"lower_2.5", number(p.lower)},
                      {"upper_97.5", number(p.upper)},
                      {"link_estimate", number(p.link_estimate)},
                      {"link_se", number(p.link_se)},
                      {"link_lower_2.5", number(p.link_lower)},
                      {"link_upper_97.5", number(p.link_upper)}});
  }
  return json{{"converged", s.converged}, {"non_converged", s.non_converged}, {"parameters", params}}.dump(2) + "\n";
}

}  // namespace ascr
