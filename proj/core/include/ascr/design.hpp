#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <vector>

#include "ascr/formula.hpp"
#include "ascr/mesh.hpp"

namespace ascr {

struct ColumnScaling {
  double mean = 0.0;
  double sd = 1.0;
};

/// Density-model basis evaluated on mesh cells: one row per cell.
class DesignMatrix {
 public:
  DesignMatrix(Eigen::MatrixXd values, std::vector<std::string> column_names, std::vector<ColumnScaling> scaling,
               bool standardized);

  const Eigen::MatrixXd& matrix() const { return values_; }
  std::size_t rows() const { return static_cast<std::size_t>(values_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values_.cols()); }
  const std::vector<std::string>& column_names() const { return names_; }
  bool standardized() const { return standardized_; }
  const std::vector<ColumnScaling>& scaling() const { return scaling_; }

  /// Coefficients on the unstandardized column scale giving the same surface.
  std::vector<double> to_original_scale(std::span<const double> beta) const;
  /// Inverse of to_original_scale.
  std::vector<double> from_original_scale(std::span<const double> beta) const;

 private:
  Eigen::MatrixXd values_;
  std::vector<std::string> names_;
  std::vector<ColumnScaling> scaling_;  // one per column; identity for the intercept
  bool standardized_;
};

/// Cubic (degree min(3, k-1)) B-spline basis with k columns; interior knots at
/// equally spaced quantiles of x, boundary knots at min/max.
Eigen::MatrixXd bspline_basis(std::span<const double> x, int k);

/// Applies the sum-to-zero constraint, returning k-1 columns whose sums vanish.
Eigen::MatrixXd sum_to_zero(const Eigen::MatrixXd& basis);

DesignMatrix build_design_matrix(const ModelFormula& formula, const Mesh& mesh, bool standardize);

/// Per-cell log density X * beta.
std::vector<double> log_density(std::span<const double> beta, const DesignMatrix& design);

/// Expected number of emitted calls: sum of cell area (in density units) times density.
double total_abundance(std::span<const double> beta, const DesignMatrix& design, const Mesh& mesh,
                       double area_unit_m2 = 1e6);
double total_abundance(std::span<const double> log_density_per_cell, const Mesh& mesh, double area_unit_m2 = 1e6);

}  // namespace ascr
