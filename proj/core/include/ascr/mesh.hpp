#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ascr/geometry.hpp"

namespace ascr {

/// A source of spatial covariates sampled at arbitrary points.
class CovariateSource {
 public:
  virtual ~CovariateSource() = default;
  virtual const std::vector<std::string>& names() const = 0;
  /// Values in names() order. Throws DataError when x lies outside coverage.
  virtual std::vector<double> sample(Point x) const = 0;
};

/// Covariates on a regular (rectilinear) grid with nearest-node lookup.
class GriddedCovariates final : public CovariateSource {
 public:
  /// `values[i]` holds the covariates of `nodes[i]`. Nodes must form a full grid.
  GriddedCovariates(std::vector<std::string> names, std::span<const Point> nodes,
                    std::span<const std::vector<double>> values);

  const std::vector<std::string>& names() const override { return names_; }
  std::vector<double> sample(Point x) const override;

 private:
  std::vector<std::string> names_;
  std::vector<double> eastings_;   // sorted unique
  std::vector<double> northings_;  // sorted unique
  std::vector<std::vector<double>> grid_;  // row-major [northing][easting]
  double half_de_ = 0.0;
  double half_dn_ = 0.0;
};

/// Covariates given by a closed-form function of position (synthetic surveys).
class FunctionCovariates final : public CovariateSource {
 public:
  FunctionCovariates(std::vector<std::string> names, std::function<std::vector<double>(Point)> fn)
      : names_(std::move(names)), fn_(std::move(fn)) {}

  const std::vector<std::string>& names() const override { return names_; }
  std::vector<double> sample(Point x) const override { return fn_(x); }

 private:
  std::vector<std::string> names_;
  std::function<std::vector<double>(Point)> fn_;
};

struct MeshCell {
  Point centroid;
  double area = 0.0;  // square meters
  std::vector<double> covariates;  // aligned with Mesh::covariate_names()
};

struct MeshSpec {
  double inner_radius = 0.0;
  double inner_spacing = 0.0;
  double outer_radius = 0.0;
  double outer_spacing = 0.0;
};

/// Integration grid over the survey region.
class Mesh {
 public:
  Mesh(std::vector<std::string> covariate_names, std::vector<MeshCell> cells, MeshSpec spec = {});

  std::size_t size() const { return cells_.size(); }
  const MeshCell& operator[](std::size_t m) const { return cells_[m]; }
  std::span<const MeshCell> cells() const { return cells_; }
  const std::vector<std::string>& covariate_names() const { return covariate_names_; }
  const MeshSpec& spec() const { return spec_; }

  bool has_covariate(const std::string& name) const;
  std::size_t covariate_index(const std::string& name) const;
  std::vector<double> covariate_column(const std::string& name) const;
  double total_area() const;

 private:
  std::vector<std::string> covariate_names_;
  std::vector<MeshCell> cells_;
  MeshSpec spec_;
};

/// Two-resolution square mesh: coarse cells of outer_spacing out to
/// outer_radius from the nearest sensor; coarse cells with any fine
/// sub-cell centroid within inner_radius are split into inner_spacing cells.
/// outer_spacing must be an integer multiple of inner_spacing. Cells are
/// ordered by northing, then easting.
Mesh build_mesh(const SensorArray& array, const CovariateSource& covariates, const MeshSpec& spec);

/// Indices of cells on the outer edge of the mesh (some side not shared with another cell).
std::vector<std::size_t> boundary_cells(const Mesh& mesh);

}  // namespace ascr
