#pragma once

#include <string>
#include <vector>

#include "ascr/bootstrap.hpp"
#include "ascr/buffer.hpp"
#include "ascr/fit.hpp"
#include "ascr/io.hpp"
#include "ascr/simulation.hpp"

namespace ascr {

/// Fit result as JSON: estimates on both scales, log L, AIC, N, lambda,
/// expected singletons and convergence metadata. Runtime is left out so the
/// document is reproducible; see timing_json.
std::string fit_json(const FitResult& fit);
std::string timing_json(double runtime_seconds, int evaluations);

std::string truncation_json(const TruncationReport& report);

/// True parameters, true N and the latent call positions and source levels.
std::string truth_json(const ScenarioSpec& spec, const Simulation& sim, double true_abundance);

std::string buffer_json(const BufferReport& report, const Mesh& mesh);

/// scenario,model,true_abundance,replicates,converged,non_converged,relative_bias,cv,mean_detected
void write_metrics_csv(const std::string& path, const std::vector<ScenarioCell>& cells);
/// scenario,model,replicate,converged,estimate,relative_error
void write_scenario_replicates_csv(const std::string& path, const std::vector<ScenarioCell>& cells);

/// rank,formula,k,loglik,aic,delta_aic,abundance,converged,message
void write_selection_csv(const std::string& path, const std::vector<SelectionRow>& rows);

/// replicate,converged,<parameter names...>,N (real scale)
void write_bootstrap_replicates_csv(const std::string& path, const std::vector<std::string>& names,
                                    const std::vector<BootstrapReplicate>& replicates);
std::string bootstrap_summary_json(const BootstrapSummary& summary);

}  // namespace ascr
