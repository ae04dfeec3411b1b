#include "ascr/buffer.hpp"

#include <algorithm>
#include <cmath>

#include "ascr/numerics.hpp"

namespace ascr {

BufferReport check_buffer(const SurveyGeometry& geom, const ModelParams& params, const SourceLevelGrid& grid,
                          int m_min, double threshold) {
  BufferReport report;
  report.threshold = threshold;
  report.cells = boundary_cells(geom.mesh());
  const SourceLevelNodes sl = source_level_nodes(params.sl, grid);
  const std::size_t k = geom.sensors();
  std::vector<double> p(k);
  for (std::size_t m : report.cells) {
    double total = 0.0;
    if (m_min <= static_cast<int>(k)) {
      for (std::size_t q = 0; q < sl.nodes.size(); ++q) {
        for (std::size_t j = 0; j < k; ++j) {
          p[j] = detect_prob_from_level(sl.nodes[q] - params.prop.beta_r * geom.log10_distance(m, j), params.det,
                                        params.prop);
        }
        total += std::exp(sl.log_weights[q]) * poisson_binomial_tail(p, m_min);
      }
    }
    report.probabilities.push_back(total);
    report.cell_pass.push_back(total < threshold);
    report.max_probability = std::max(report.max_probability, total);
    report.pass = report.pass && total < threshold;
  }
  return report;
}

}  // namespace ascr
