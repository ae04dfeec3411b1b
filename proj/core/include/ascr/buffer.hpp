#pragma once

#include <vector>

#include "ascr/likelihood.hpp"

namespace ascr {

inline constexpr double kDefaultBufferThreshold = 0.001;

struct BufferReport {
  std::vector<std::size_t> cells;      // boundary cell indices
  std::vector<double> probabilities;   // source-level-marginalized p. per boundary cell
  std::vector<bool> cell_pass;
  double max_probability = 0.0;
  double threshold = kDefaultBufferThreshold;
  bool pass = true;
};

/// Multiply-detection probability at the mesh boundary. Passes when every
/// boundary cell lies strictly below the threshold.
BufferReport check_buffer(const SurveyGeometry& geom, const ModelParams& params, const SourceLevelGrid& grid,
                          int m_min, double threshold = kDefaultBufferThreshold);

}  // namespace ascr
