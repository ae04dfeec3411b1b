#include "ascr/design.hpp"

#include <algorithm>
#include <cmath>

#include "ascr/error.hpp"

namespace ascr {

namespace {

// Sample quantile with linear interpolation between order statistics.
double quantile(std::vector<double> sorted, double prob) {
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

DesignMatrix::DesignMatrix(Eigen::MatrixXd values, std::vector<std::string> column_names,
                           std::vector<ColumnScaling> scaling, bool standardized)
    : values_(std::move(values)), names_(std::move(column_names)), scaling_(std::move(scaling)),
      standardized_(standardized) {
  if (names_.size() != static_cast<std::size_t>(values_.cols()) || scaling_.size() != names_.size()) {
    throw std::invalid_argument("design matrix: column metadata does not match the matrix");
  }
  if (!values_.allFinite()) throw NumericalError("design matrix contains non-finite entries");
}

std::vector<double> DesignMatrix::to_original_scale(std::span<const double> beta) const {
  if (beta.size() != cols()) throw std::invalid_argument("coefficient length does not match design matrix");
  std::vector<double> out(beta.begin(), beta.end());
  for (std::size_t c = 1; c < out.size(); ++c) {
    out[c] = beta[c] / scaling_[c].sd;
    out[0] -= beta[c] * scaling_[c].mean / scaling_[c].sd;
  }
  return out;
}

std::vector<double> DesignMatrix::from_original_scale(std::span<const double> beta) const {
  if (beta.size() != cols()) throw std::invalid_argument("coefficient length does not match design matrix");
  std::vector<double> out(beta.begin(), beta.end());
  for (std::size_t c = 1; c < out.size(); ++c) {
    out[c] = beta[c] * scaling_[c].sd;
    out[0] += beta[c] * scaling_[c].mean;
  }
  return out;
}

Eigen::MatrixXd bspline_basis(std::span<const double> x, int k) {
  if (k < 3) throw std::invalid_argument("spline basis size must be at least 3");
  if (x.empty()) throw std::invalid_argument("spline basis needs data");
  std::vector<double> sorted(x.begin(), x.end());
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front();
  const double hi = sorted.back();
  if (!(hi > lo)) throw ConfigError("smooth term on a constant covariate");

  const int degree = std::min(3, k - 1);
  const int interior = k - degree - 1;
  std::vector<double> knots(static_cast<std::size_t>(degree + 1), lo);
  for (int i = 1; i <= interior; ++i) knots.push_back(quantile(sorted, static_cast<double>(i) / (interior + 1)));
  knots.insert(knots.end(), static_cast<std::size_t>(degree + 1), hi);

  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, k);
  const std::size_t nk = knots.size();
  std::vector<double> b(nk - 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double v = x[static_cast<std::size_t>(r)];
    // degree-0 indicators; the right boundary belongs to the last non-empty span
    for (std::size_t i = 0; i + 1 < nk; ++i) {
      const bool in_span = (knots[i] <= v && v < knots[i + 1]) ||
                           (v == hi && knots[i] < knots[i + 1] && knots[i + 1] == hi);
      b[i] = in_span ? 1.0 : 0.0;
    }
    for (int d = 1; d <= degree; ++d) {
      for (std::size_t i = 0; i + static_cast<std::size_t>(d) + 1 < nk; ++i) {
        double term = 0.0;
        const double left = knots[i + static_cast<std::size_t>(d)] - knots[i];
        if (left > 0.0) term += (v - knots[i]) / left * b[i];
        const double right = knots[i + static_cast<std::size_t>(d) + 1] - knots[i + 1];
        if (right > 0.0) term += (knots[i + static_cast<std::size_t>(d) + 1] - v) / right * b[i + 1];
        b[i] = term;
      }
    }
    for (int c = 0; c < k; ++c) basis(r, c) = b[static_cast<std::size_t>(c)];
  }
  return basis;
}

Eigen::MatrixXd sum_to_zero(const Eigen::MatrixXd& basis) {
  const Eigen::VectorXd sums = basis.colwise().sum().transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(sums);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(basis.cols(), basis.cols());
  return basis * q.rightCols(basis.cols() - 1);
}

DesignMatrix build_design_matrix(const ModelFormula& formula, const Mesh& mesh, bool standardize) {
  const auto rows = static_cast<Eigen::Index>(mesh.size());
  std::vector<Eigen::VectorXd> columns;
  std::vector<std::string> names;
  auto column_of = [&](const std::string& cov) {
    const auto v = mesh.covariate_column(cov);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), rows));
  };

  for (const Term& term : formula.terms) {
    switch (term.kind) {
      case TermKind::intercept:
        columns.push_back(Eigen::VectorXd::Ones(rows));
        names.emplace_back("(Intercept)");
        break;
      case TermKind::linear:
        columns.push_back(column_of(term.covariate));
        names.push_back(term.covariate);
        break;
      case TermKind::power:
        columns.push_back(column_of(term.covariate).array().pow(term.order).matrix());
        names.push_back(to_string(term));
        break;
      case TermKind::log: {
        const Eigen::VectorXd v = column_of(term.covariate);
        if ((v.array() <= 0.0).any()) {
          throw ConfigError("log term on covariate '" + term.covariate + "' with non-positive values");
        }
        columns.push_back(v.array().log().matrix());
        names.push_back(to_string(term));
        break;
      }
      case TermKind::interaction:
        columns.push_back(column_of(term.covariate).cwiseProduct(column_of(term.covariate2)));
        names.push_back(to_string(term));
        break;
      case TermKind::smooth: {
        const auto v = mesh.covariate_column(term.covariate);
        const Eigen::MatrixXd basis = sum_to_zero(bspline_basis(v, term.order));
        for (Eigen::Index c = 0; c < basis.cols(); ++c) {
          columns.push_back(basis.col(c));
          names.push_back("s(" + term.covariate + ")." + std::to_string(c + 1));
        }
        break;
      }
    }
  }

  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(columns.size()));
  std::vector<ColumnScaling> scaling(columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c) {
    Eigen::VectorXd col = columns[c];
    if (standardize && c > 0) {
      const double mean = col.mean();
      const double var = rows > 1 ? (col.array() - mean).square().sum() / static_cast<double>(rows - 1) : 0.0;
      const double sd = std::sqrt(var);
      if (!(sd > 0.0)) throw ConfigError("design column '" + names[c] + "' is constant over the mesh");
      col = (col.array() - mean) / sd;
      scaling[c] = {mean, sd};
    }
    x.col(static_cast<Eigen::Index>(c)) = col;
  }
  return DesignMatrix(std::move(x), std::move(names), std::move(scaling), standardize);
}

std::vector<double> log_density(std::span<const double> beta, const DesignMatrix& design) {
  if (beta.size() != design.cols()) {
    throw std::invalid_argument("density coefficients (" + std::to_string(beta.size()) +
                                ") do not match design columns (" + std::to_string(design.cols()) + ")");
  }
  const Eigen::Map<const Eigen::VectorXd> b(beta.data(), static_cast<Eigen::Index>(beta.size()));
  const Eigen::VectorXd eta = design.matrix() * b;
  return {eta.data(), eta.data() + eta.size()};
}

double total_abundance(std::span<const double> log_density_per_cell, const Mesh& mesh, double area_unit_m2) {
  if (log_density_per_cell.size() != mesh.size()) throw std::invalid_argument("density/mesh size mismatch");
  double total = 0.0;
  for (std::size_t m = 0; m < mesh.size(); ++m) {
    total += mesh[m].area / area_unit_m2 * std::exp(log_density_per_cell[m]);
  }
  return total;
}

double total_abundance(std::span<const double> beta, const DesignMatrix& design, const Mesh& mesh,
                       double area_unit_m2) {
  return total_abundance(log_density(beta, design), mesh, area_unit_m2);
}

}  // namespace ascr
