#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ascr/formula.hpp"

namespace oracle {

using namespace ascr;

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double von_mises(double offset, double kappa) {
  return std::exp(kappa * std::cos(offset)) / (2.0 * std::numbers::pi * std::cyl_bessel_i(0.0, kappa));
}

std::vector<double> enumerate_counts(const std::vector<double>& p) {
  const std::size_t k = p.size();
  std::vector<double> out(k + 1, 0.0);
  for (std::uint32_t h = 0; h < (1u << k); ++h) {
    double prob = 1.0;
    int c = 0;
    for (std::size_t j = 0; j < k; ++j) {
      if (h & (1u << j)) {
        prob *= p[j];
        ++c;
      } else {
        prob *= 1.0 - p[j];
      }
    }
    out[c] += prob;
  }
  return out;
}

double enumerate_tail(const std::vector<double>& p, int m) {
  const std::size_t k = p.size();
  double total = 0.0;
  for (std::uint32_t h = 0; h < (1u << k); ++h) {
    double prob = 1.0;
    int c = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const bool det = h & (1u << j);
      prob *= det ? p[j] : 1.0 - p[j];
      c += det;
    }
    if (c >= m) total += prob;
  }
  return total;
}

namespace {

struct Layout {
  std::vector<Point> sensors;
  std::vector<Point> cells;
  std::vector<double> area;     // in density units
  std::vector<double> density;  // per cell
  std::vector<double> nodes;
  std::vector<double> weights;
};

double dist(Point a, Point b) { return std::max(1.0, std::hypot(a.easting - b.easting, a.northing - b.northing)); }

double true_bearing(Point sensor, Point x) {
  double t = std::atan2(x.easting - sensor.easting, x.northing - sensor.northing);
  if (t < 0.0) t += 2.0 * std::numbers::pi;
  return t;
}

Layout layout(const SurveyGeometry& geom, const DesignMatrix& design, const SourceLevelGrid& grid,
              const ModelParams& params) {
  Layout l;
  for (std::size_t j = 0; j < geom.sensors(); ++j) l.sensors.push_back(geom.array()[j]);
  const Eigen::MatrixXd& x = design.matrix();
  for (std::size_t m = 0; m < geom.cells(); ++m) {
    l.cells.push_back(geom.mesh()[m].centroid);
    l.area.push_back(geom.mesh()[m].area / geom.area_unit_m2());
    double eta = 0.0;
    const auto row = static_cast<Eigen::Index>(m);
    for (std::size_t c = 0; c < design.cols(); ++c) eta += x(row, static_cast<Eigen::Index>(c)) * params.beta[c];
    l.density.push_back(std::exp(eta));
  }
  if (params.sl.fixed) {
    l.nodes = {params.sl.mu_s};
    l.weights = {1.0};
  } else {
    double total = 0.0;
    for (double s : grid.nodes()) {
      const double w = normal_pdf((s - params.sl.mu_s) / params.sl.sigma_s);
      l.nodes.push_back(s);
      l.weights.push_back(w);
      total += w;
    }
    for (double& w : l.weights) w /= total;
  }
  return l;
}

double bearing_density(double offset, const BearingParams& b, BearingModel model) {
  switch (model) {
    case BearingModel::mixture:
      return b.psi_kappa * von_mises(offset, b.kappa) + (1.0 - b.psi_kappa) * von_mises(offset, b.kappa + b.delta_kappa);
    case BearingModel::single:
      return von_mises(offset, b.kappa);
    case BearingModel::none:
      return 1.0;
  }
  return 1.0;
}

double expected_level(double s, Point sensor, Point x, const ModelParams& p) {
  return s - p.prop.beta_r * std::log10(dist(sensor, x));
}

double history_prob(const std::vector<double>& p, const Dataset& data, std::size_t i) {
  double prob = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j) prob *= data.detected(i, j) ? p[j] : 1.0 - p[j];
  return prob;
}

}  // namespace

Values threshold_likelihood(const SurveyGeometry& geom, const DesignMatrix& design, const SourceLevelGrid& grid,
                            const Dataset& data, const ModelParams& params, const ModelOptions& options) {
  const Layout l = layout(geom, design, grid, params);
  const std::size_t k = l.sensors.size();
  const double sr = params.prop.sigma_r;
  const double t = params.det.t_r;

  auto probs = [&](std::size_t m, double s) {
    std::vector<double> p(k);
    for (std::size_t j = 0; j < k; ++j) {
      const double e = expected_level(s, l.sensors[j], l.cells[m], params);
      p[j] = params.det.g0 * normal_sf((t - e) / sr);
    }
    return p;
  };

  Values v;
  double den = 0.0;  // sum of a D w p.
  double single = 0.0;
  for (std::size_t m = 0; m < l.cells.size(); ++m) {
    for (std::size_t q = 0; q < l.nodes.size(); ++q) {
      const auto p = probs(m, l.nodes[q]);
      const double mass = l.area[m] * l.density[m] * l.weights[q];
      den += mass * enumerate_tail(p, data.m_min);
      single += mass * enumerate_counts(p)[1];
    }
  }
  v.lambda = data.period * den;
  v.singletons = data.period * single;

  for (std::size_t i = 0; i < data.size(); ++i) {
    double num = 0.0;
    for (std::size_t m = 0; m < l.cells.size(); ++m) {
      for (std::size_t q = 0; q < l.nodes.size(); ++q) {
        const auto p = probs(m, l.nodes[q]);
        const double pdot = enumerate_tail(p, data.m_min);
        // f(omega | x, s, detected) f(y) f(r) f(x, s | detected), the last up to the common denominator
        double term = history_prob(p, data, i) / pdot;
        for (std::size_t j = 0; j < k; ++j) {
          if (!data.detected(i, j)) continue;
          const double e = expected_level(l.nodes[q], l.sensors[j], l.cells[m], params);
          const double r = data.received_level(i, j);
          term *= normal_pdf((r - e) / sr) / sr / normal_sf((t - e) / sr);
          const double off = data.bearing(i, j) - true_bearing(l.sensors[j], l.cells[m]);
          term *= bearing_density(off, params.bearing, options.bearing);
        }
        num += term * l.area[m] * l.density[m] * l.weights[q] * pdot;
      }
    }
    v.calls.push_back(std::log(num / den));
  }
  for (double c : v.calls) v.conditional += c;
  const double n = static_cast<double>(data.size());
  v.full = n * std::log(v.lambda) - v.lambda - std::lgamma(n + 1.0) + v.conditional;
  return v;
}

double snr_detection(double expected_level, double noise, const JanoschekParams& jp, double sigma_r) {
  if (std::isinf(jp.theta_R)) return jp.theta_U * normal_sf((noise - expected_level) / sigma_r);
  const double lo = noise;
  const double hi = expected_level + 10.0 * sigma_r;
  if (hi <= lo) return 0.0;
  const int panels = 20000;
  const double h = (hi - lo) / panels;
  auto f = [&](double r) {
    const double snr = r - noise;
    const double p = snr > 0.0 ? jp.theta_U * (1.0 - std::exp(-jp.theta_R * std::pow(snr, jp.theta_I))) : 0.0;
    return p * normal_pdf((r - expected_level) / sigma_r) / sigma_r;
  };
  double sum = f(lo) + f(hi);
  for (int i = 1; i < panels; ++i) sum += (i % 2 ? 4.0 : 2.0) * f(lo + i * h);
  return sum * h / 3.0;
}

Values snr_likelihood(const SurveyGeometry& geom, const DesignMatrix& design, const SourceLevelGrid& grid,
                      const Dataset& data, const NoiseSample& noise, const ModelParams& params,
                      const ModelOptions& options) {
  const Layout l = layout(geom, design, grid, params);
  const std::size_t k = l.sensors.size();
  const double sr = params.prop.sigma_r;

  auto g = [&](std::size_t m, double s, const double* c) {
    std::vector<double> out(k);
    for (std::size_t j = 0; j < k; ++j) {
      out[j] = snr_detection(expected_level(s, l.sensors[j], l.cells[m], params), c[j], params.jan, sr);
    }
    return out;
  };
  // sum over cells and nodes of a D w P(count) at noise vector c
  auto rate = [&](const double* c, bool singletons) {
    double total = 0.0;
    for (std::size_t m = 0; m < l.cells.size(); ++m) {
      for (std::size_t q = 0; q < l.nodes.size(); ++q) {
        const auto p = g(m, l.nodes[q], c);
        const double f = singletons ? enumerate_counts(p)[1] : enumerate_tail(p, data.m_min);
        total += l.area[m] * l.density[m] * l.weights[q] * f;
      }
    }
    return total;
  };

  Values v;
  for (std::size_t row = 0; row < noise.rows(); ++row) {
    v.lambda += rate(&noise.values[row * k], false);
    v.singletons += rate(&noise.values[row * k], true);
  }
  v.lambda *= data.period / static_cast<double>(noise.rows());
  v.singletons *= data.period / static_cast<double>(noise.rows());

  for (std::size_t i = 0; i < data.size(); ++i) {
    const double* c = &data.noise[i * k];
    double num = 0.0;
    for (std::size_t m = 0; m < l.cells.size(); ++m) {
      for (std::size_t q = 0; q < l.nodes.size(); ++q) {
        const auto p = g(m, l.nodes[q], c);
        double term = l.area[m] * l.density[m] * l.weights[q];
        for (std::size_t j = 0; j < k; ++j) {
          if (!data.detected(i, j)) {
            term *= 1.0 - p[j];
            continue;
          }
          const double e = expected_level(l.nodes[q], l.sensors[j], l.cells[m], params);
          const double r = data.received_level(i, j);
          term *= p[j] * normal_pdf((r - e) / sr) / sr / normal_sf((c[j] - e) / sr);
          const double off = data.bearing(i, j) - true_bearing(l.sensors[j], l.cells[m]);
          term *= bearing_density(off, params.bearing, options.bearing);
        }
        num += term;
      }
    }
    v.calls.push_back(std::log(num / rate(c, false)));
  }
  for (double c : v.calls) v.conditional += c;
  const double n = static_cast<double>(data.size());
  v.full = n * std::log(v.lambda) - v.lambda - std::lgamma(n + 1.0) + v.conditional;
  return v;
}

Tiny random_tiny(std::mt19937_64& rng, const TinyShape& shape) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto unif = [&](double a, double b) { return a + (b - a) * u(rng); };

  Tiny t;
  std::vector<Point> sensors;
  while (static_cast<int>(sensors.size()) < shape.sensors) {
    sensors.push_back({unif(-1500.0, 1500.0), unif(-1500.0, 1500.0)});
  }
  std::vector<MeshCell> cells;
  for (int m = 0; m < shape.cells; ++m) {
    cells.push_back({{unif(-3000.0, 3000.0), unif(-3000.0, 3000.0)}, unif(1e6, 4e6), {unif(10.0, 100.0)}});
  }
  Mesh mesh({"depth"}, cells);
  const std::vector<std::string> names{"depth"};
  t.design = std::make_unique<DesignMatrix>(build_design_matrix(parse_formula("D ~ depth", names), mesh, false));
  t.geom = std::make_unique<SurveyGeometry>(SensorArray(sensors), mesh, 1e6);

  const double lower = 150.0, step = 3.0;
  t.grid = std::make_unique<SourceLevelGrid>(lower, lower + step * std::max(1, shape.nodes - 1), step);
  t.options = shape.options;
  if (shape.nodes == 1) t.options.source_level = SourceLevelMode::fixed;

  ModelParams& p = t.params;
  p.det.g0 = unif(0.3, 0.9);
  p.det.t_r = 96.0;
  p.prop.beta_r = unif(12.0, 20.0);
  p.prop.sigma_r = unif(2.0, 4.0);
  p.sl.fixed = t.options.source_level == SourceLevelMode::fixed;
  const int nodes = static_cast<int>(t.grid->size());
  p.sl.mu_s = lower + step * (nodes - 1) / 2.0 + unif(-0.3, 0.3);
  // keep the prior inside the grid so the coverage check passes
  p.sl.sigma_s = nodes * step / 2.0 / 6.0;
  p.bearing.kappa = unif(0.1, 3.0);
  p.bearing.delta_kappa = unif(5.0, 40.0);
  p.bearing.psi_kappa = unif(0.05, 0.5);
  p.jan.theta_U = unif(0.5, 0.95);
  p.jan.theta_R = unif(0.05, 0.5);
  p.jan.theta_I = u(rng) < 0.5 ? 2.0 : 3.0;
  p.beta = {unif(-1.0, 1.0), unif(-0.02, 0.02)};

  const std::size_t k = static_cast<std::size_t>(shape.sensors);
  t.data.sensors = k;
  t.data.m_min = shape.m_min;
  t.data.period = unif(0.5, 2.0);
  for (int i = 0; i < shape.calls; ++i) {
    std::vector<std::uint8_t> w(k, 0);
    int count = 0;
    while (count < shape.m_min) {
      count = 0;
      for (auto& x : w) {
        x = u(rng) < 0.6;
        count += x;
      }
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> y(k, nan), r(k, nan), c;
    if (shape.with_noise) c.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
      if (shape.with_noise) c[j] = unif(88.0, 95.0);
      if (!w[j]) continue;
      y[j] = unif(0.0, 2.0 * std::numbers::pi);
      r[j] = unif(96.0, 106.0);
    }
    t.data.add_call(w, y, r, c);
  }
  t.noise.sensors = k;
  for (int row = 0; row < 2; ++row) {
    for (std::size_t j = 0; j < k; ++j) t.noise.values.push_back(unif(88.0, 95.0));
  }
  return t;
}

double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(b), 1e-300);
}

}  // namespace oracle
