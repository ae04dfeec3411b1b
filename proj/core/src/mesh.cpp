#include "ascr/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ascr/error.hpp"

namespace ascr {

namespace {

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t nearest_index(const std::vector<double>& axis, double x) {
  auto it = std::lower_bound(axis.begin(), axis.end(), x);
  if (it == axis.begin()) return 0;
  if (it == axis.end()) return axis.size() - 1;
  const auto hi = static_cast<std::size_t>(it - axis.begin());
  return (x - axis[hi - 1] <= axis[hi] - x) ? hi - 1 : hi;
}

double half_spacing(const std::vector<double>& axis) {
  if (axis.size() < 2) return 0.0;
  double smallest = axis[1] - axis[0];
  for (std::size_t i = 2; i < axis.size(); ++i) smallest = std::min(smallest, axis[i] - axis[i - 1]);
  return 0.5 * smallest;
}

}  // namespace

GriddedCovariates::GriddedCovariates(std::vector<std::string> names, std::span<const Point> nodes,
                                     std::span<const std::vector<double>> values)
    : names_(std::move(names)) {
  if (nodes.size() != values.size() || nodes.empty()) {
    throw DataError("covariate grid: node and value counts differ or grid is empty");
  }
  std::vector<double> e, n;
  for (const Point& p : nodes) {
    e.push_back(p.easting);
    n.push_back(p.northing);
  }
  eastings_ = sorted_unique(std::move(e));
  northings_ = sorted_unique(std::move(n));
  if (eastings_.size() * northings_.size() != nodes.size()) {
    throw DataError("covariate grid is not a full regular grid (" + std::to_string(nodes.size()) +
                    " nodes for " + std::to_string(eastings_.size()) + "x" +
                    std::to_string(northings_.size()) + " axes)");
  }
  grid_.assign(nodes.size(), {});
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (values[i].size() != names_.size()) throw DataError("covariate grid: wrong number of values at node");
    const std::size_t ie = nearest_index(eastings_, nodes[i].easting);
    const std::size_t in = nearest_index(northings_, nodes[i].northing);
    grid_[in * eastings_.size() + ie] = values[i];
  }
  half_de_ = half_spacing(eastings_);
  half_dn_ = half_spacing(northings_);
}

std::vector<double> GriddedCovariates::sample(Point x) const {
  const double tol = 1e-9 * (1.0 + std::abs(x.easting) + std::abs(x.northing));
  if (x.easting < eastings_.front() - half_de_ - tol || x.easting > eastings_.back() + half_de_ + tol ||
      x.northing < northings_.front() - half_dn_ - tol || x.northing > northings_.back() + half_dn_ + tol) {
    std::ostringstream msg;
    msg << "covariate field does not cover point (" << x.easting << ", " << x.northing << ")";
    throw DataError(msg.str());
  }
  const std::size_t ie = nearest_index(eastings_, x.easting);
  const std::size_t in = nearest_index(northings_, x.northing);
  return grid_[in * eastings_.size() + ie];
}

Mesh::Mesh(std::vector<std::string> covariate_names, std::vector<MeshCell> cells, MeshSpec spec)
    : covariate_names_(std::move(covariate_names)), cells_(std::move(cells)), spec_(spec) {
  if (cells_.empty()) throw ConfigError("mesh must contain at least one cell");
  for (std::size_t m = 0; m < cells_.size(); ++m) {
    const MeshCell& c = cells_[m];
    if (!(c.area > 0.0) || !std::isfinite(c.area)) {
      throw ConfigError("mesh cell " + std::to_string(m) + " has non-positive area");
    }
    if (c.covariates.size() != covariate_names_.size()) {
      throw ConfigError("mesh cell " + std::to_string(m) + " has the wrong number of covariates");
    }
  }
}

bool Mesh::has_covariate(const std::string& name) const {
  return std::find(covariate_names_.begin(), covariate_names_.end(), name) != covariate_names_.end();
}

std::size_t Mesh::covariate_index(const std::string& name) const {
  auto it = std::find(covariate_names_.begin(), covariate_names_.end(), name);
  if (it == covariate_names_.end()) throw ConfigError("mesh has no covariate named '" + name + "'");
  return static_cast<std::size_t>(it - covariate_names_.begin());
}

std::vector<double> Mesh::covariate_column(const std::string& name) const {
  const std::size_t idx = covariate_index(name);
  std::vector<double> out;
  out.reserve(cells_.size());
  for (const MeshCell& c : cells_) out.push_back(c.covariates[idx]);
  return out;
}

double Mesh::total_area() const {
  double total = 0.0;
  for (const MeshCell& c : cells_) total += c.area;
  return total;
}

Mesh build_mesh(const SensorArray& array, const CovariateSource& covariates, const MeshSpec& spec) {
  if (!(spec.inner_spacing > 0.0) || !(spec.outer_spacing > 0.0)) {
    throw ConfigError("mesh spacings must be positive");
  }
  if (!(spec.inner_radius < spec.outer_radius) || spec.inner_radius < 0.0) {
    throw ConfigError("mesh inner radius must be non-negative and below the outer radius");
  }
  const double ratio = spec.outer_spacing / spec.inner_spacing;
  const auto split = static_cast<int>(std::lround(ratio));
  if (split < 1 || std::abs(ratio - split) > 1e-9 * ratio) {
    throw ConfigError("outer spacing must be an integer multiple of inner spacing");
  }

  double min_e = array[0].easting, max_e = min_e;
  double min_n = array[0].northing, max_n = min_n;
  for (const Point& p : array.positions()) {
    min_e = std::min(min_e, p.easting);
    max_e = std::max(max_e, p.easting);
    min_n = std::min(min_n, p.northing);
    max_n = std::max(max_n, p.northing);
  }
  const double ce = 0.5 * (min_e + max_e);
  const double cn = 0.5 * (min_n + max_n);
  const double big = spec.outer_spacing;
  const double small = spec.inner_spacing;
  const int ie_lo = static_cast<int>(std::floor((min_e - spec.outer_radius - ce) / big)) - 1;
  const int ie_hi = static_cast<int>(std::ceil((max_e + spec.outer_radius - ce) / big)) + 1;
  const int in_lo = static_cast<int>(std::floor((min_n - spec.outer_radius - cn) / big)) - 1;
  const int in_hi = static_cast<int>(std::ceil((max_n + spec.outer_radius - cn) / big)) + 1;

  std::vector<MeshCell> cells;
  auto add_cell = [&](Point c, double side) {
    cells.push_back(MeshCell{c, side * side, covariates.sample(c)});
  };
  for (int jn = in_lo; jn <= in_hi; ++jn) {
    for (int je = ie_lo; je <= ie_hi; ++je) {
      const Point coarse{ce + (je + 0.5) * big, cn + (jn + 0.5) * big};
      if (array.nearest_distance(coarse) > spec.outer_radius) continue;
      std::vector<Point> fine;
      bool any_inner = false;
      for (int b = 0; b < split; ++b) {
        for (int a = 0; a < split; ++a) {
          const Point f{ce + je * big + (a + 0.5) * small, cn + jn * big + (b + 0.5) * small};
          any_inner = any_inner || array.nearest_distance(f) <= spec.inner_radius;
          fine.push_back(f);
        }
      }
      if (any_inner && split > 1) {
        for (const Point& f : fine) add_cell(f, small);
      } else {
        add_cell(coarse, any_inner ? small : big);
      }
    }
  }
  std::stable_sort(cells.begin(), cells.end(), [](const MeshCell& a, const MeshCell& b) {
    if (a.centroid.northing != b.centroid.northing) return a.centroid.northing < b.centroid.northing;
    return a.centroid.easting < b.centroid.easting;
  });
  return Mesh(covariates.names(), std::move(cells), spec);
}

std::vector<std::size_t> boundary_cells(const Mesh& mesh) {
  auto covered = [&](Point p) {
    for (const MeshCell& c : mesh.cells()) {
      const double h = 0.5 * std::sqrt(c.area);
      if (std::abs(p.easting - c.centroid.easting) <= h && std::abs(p.northing - c.centroid.northing) <= h) {
        return true;
      }
    }
    return false;
  };
  std::vector<std::size_t> out;
  for (std::size_t m = 0; m < mesh.size(); ++m) {
    const MeshCell& c = mesh[m];
    const double reach = 0.5 * std::sqrt(c.area) * 1.001;
    const Point probes[4] = {{c.centroid.easting + reach, c.centroid.northing},
                             {c.centroid.easting - reach, c.centroid.northing},
                             {c.centroid.easting, c.centroid.northing + reach},
                             {c.centroid.easting, c.centroid.northing - reach}};
    for (const Point& p : probes) {
      if (!covered(p)) {
        out.push_back(m);
        break;
      }
    }
  }
  return out;
}

}  // namespace ascr
