#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "ascr/design.hpp"
#include "ascr/error.hpp"
#include "ascr/formula.hpp"

using namespace ascr;

namespace {

Mesh random_mesh(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<MeshCell> cells;
  for (std::size_t i = 0; i < n; ++i) {
    const double depth = 5.0 + 120.0 * u(rng);
    const double dist = 200.0 + 30000.0 * u(rng);
    cells.push_back({{1000.0 * static_cast<double>(i), 0.0}, 1e6 * (0.5 + u(rng)), {depth, dist}});
  }
  return Mesh(default_covariates(), std::move(cells));
}

std::vector<std::string> models35() {
  std::ifstream in(ASCR_MODELS35);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(": ");
    if (colon != std::string::npos) out.push_back(line.substr(colon + 2));
  }
  return out;
}

}  // namespace

TEST(Formula, Examples) {
  const auto one = parse_formula("D ~ 1");
  EXPECT_TRUE(one.intercept_only());
  const auto m33 = parse_formula("D ~ s(depth, k = 6, fx = TRUE) + s(distance_to_coast, k = 6, fx = TRUE)");
  ASSERT_EQ(m33.terms.size(), 3u);
  EXPECT_EQ(m33.terms[1].kind, TermKind::smooth);
  EXPECT_EQ(m33.terms[1].order, 6);
  EXPECT_EQ(m33.terms[2].covariate, "distance_to_coast");
  EXPECT_THROW(parse_formula("D ~ s(depth, k = 2, fx = TRUE)"), FormulaError);
}

TEST(Formula, ErrorsCarryPosition) {
  try {
    parse_formula("D ~ depth + salinity");
    FAIL();
  } catch (const FormulaError& e) {
    EXPECT_EQ(e.position(), 12u);
  }
  EXPECT_THROW(parse_formula("D ~ depth +"), FormulaError);
  EXPECT_THROW(parse_formula("D = depth"), FormulaError);
  EXPECT_THROW(parse_formula("D ~ depth + depth"), FormulaError);
  EXPECT_THROW(parse_formula("D ~ s(depth, k = 6, fx = FALSE)"), FormulaError);
  EXPECT_THROW(parse_formula("D ~ 2"), FormulaError);
}

TEST(Formula, RoundTripAllCandidates) {
  const auto list = models35();
  ASSERT_EQ(list.size(), 35u);
  for (const auto& text : list) {
    const auto f = parse_formula(text);
    EXPECT_EQ(parse_formula(to_string(f)), f) << text;
    EXPECT_EQ(to_string(parse_formula(to_string(f))), to_string(f));
  }
  EXPECT_EQ(referenced_covariates(parse_formula("D ~ logdepth + distance_to_coast2")),
            (std::vector<std::string>{"depth", "distance_to_coast"}));
}

TEST(Design, ColumnCounts) {
  const Mesh mesh = random_mesh(438, 1);
  const auto ones = build_design_matrix(parse_formula("D ~ 1"), mesh, true);
  EXPECT_EQ(ones.rows(), 438u);
  EXPECT_EQ(ones.cols(), 1u);
  EXPECT_TRUE((ones.matrix().array() == 1.0).all());
  const auto m33 = build_design_matrix(
      parse_formula("D ~ s(depth, k = 6, fx = TRUE) + s(distance_to_coast, k = 6, fx = TRUE)"), mesh, true);
  EXPECT_EQ(m33.cols(), 11u);
  EXPECT_EQ(m33.column_names()[0], "(Intercept)");
  const auto inter = build_design_matrix(parse_formula("D ~ depth + distance_to_coast + depth:distance_to_coast"), mesh, false);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    EXPECT_DOUBLE_EQ(inter.matrix()(static_cast<Eigen::Index>(i), 3), mesh[i].covariates[0] * mesh[i].covariates[1]);
  }
}

TEST(Design, StandardizedColumnsHaveUnitScale) {
  const Mesh mesh = random_mesh(200, 2);
  const auto x = build_design_matrix(parse_formula("D ~ distance_to_coast + distance_to_coast2 + logdepth"), mesh, true);
  ASSERT_EQ(x.cols(), 4u);
  const double n = static_cast<double>(mesh.size());
  for (Eigen::Index c = 1; c < 4; ++c) {
    const auto col = x.matrix().col(c);
    const double mean = col.mean();
    const double sd = std::sqrt((col.array() - mean).square().sum() / (n - 1.0));
    EXPECT_NEAR(mean, 0.0, 1e-12);
    EXPECT_NEAR(sd, 1.0, 1e-12);
  }
  const auto raw = build_design_matrix(parse_formula("D ~ distance_to_coast + distance_to_coast2 + logdepth"), mesh, false);
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    EXPECT_DOUBLE_EQ(raw.matrix()(r, 2), mesh[i].covariates[1] * mesh[i].covariates[1]);
    EXPECT_DOUBLE_EQ(raw.matrix()(r, 3), std::log(mesh[i].covariates[0]));
  }
}

TEST(Design, SmoothColumnsSumToZero) {
  const Mesh mesh = random_mesh(300, 3);
  for (int k = 3; k <= 8; ++k) {
    const auto f = parse_formula("D ~ s(depth, k = " + std::to_string(k) + ", fx = TRUE)");
    const auto x = build_design_matrix(f, mesh, false);
    ASSERT_EQ(x.cols(), static_cast<std::size_t>(k));
    for (Eigen::Index c = 1; c < static_cast<Eigen::Index>(x.cols()); ++c) {
      EXPECT_NEAR(x.matrix().col(c).sum(), 0.0, 1e-9);
      EXPECT_LE(x.matrix().col(c).cwiseAbs().maxCoeff(), 1.0 + 1e-12);
    }
  }
  // the unconstrained cubic B-spline basis is a partition of unity
  std::vector<double> xs;
  for (const auto& c : mesh.cells()) xs.push_back(c.covariates[0]);
  const Eigen::MatrixXd b = bspline_basis(xs, 6);
  EXPECT_EQ(b.cols(), 6);
  EXPECT_LT((b.rowwise().sum().array() - 1.0).abs().maxCoeff(), 1e-12);
  EXPECT_GE(b.minCoeff(), 0.0);
}

TEST(Design, Errors) {
  std::vector<MeshCell> cells{{{0, 0}, 1e6, {0.0, 10.0}}, {{1, 0}, 1e6, {5.0, 20.0}}};
  const Mesh bad(default_covariates(), cells);
  EXPECT_THROW(build_design_matrix(parse_formula("D ~ logdepth"), bad, false), ConfigError);
  std::vector<MeshCell> flat{{{0, 0}, 1e6, {3.0, 10.0}}, {{1, 0}, 1e6, {3.0, 20.0}}};
  const Mesh constant(default_covariates(), flat);
  EXPECT_THROW(build_design_matrix(parse_formula("D ~ depth"), constant, true), ConfigError);
  const auto x = build_design_matrix(parse_formula("D ~ distance_to_coast"), bad, false);
  EXPECT_THROW(log_density(std::vector<double>{1.0}, x), std::invalid_argument);
}

TEST(LogDensity, Examples) {
  std::vector<MeshCell> cells{{{0, 0}, 1e6, {10.0, 0.0}}, {{1, 0}, 1e6, {10.0, 45.0 / 106.0}}};
  const Mesh mesh(default_covariates(), cells);
  const auto x = build_design_matrix(parse_formula("D ~ distance_to_coast + distance_to_coast2"), mesh, false);
  const std::vector<double> beta{-12.0, 45.0, -53.0};
  const auto ld = log_density(beta, x);
  EXPECT_DOUBLE_EQ(ld[0], -12.0);
  const double d = 45.0 / 106.0;
  EXPECT_NEAR(ld[1], -12.0 + 45.0 * d - 53.0 * d * d, 1e-13);
  EXPECT_NEAR(ld[1], -2.44811, 1e-5);
  const auto zero = log_density(std::vector<double>{0.0, 0.0, 0.0}, x);
  EXPECT_EQ(zero, (std::vector<double>{0.0, 0.0}));
}

TEST(Abundance, Examples) {
  std::vector<MeshCell> cells{{{0, 0}, 3e6, {1.0, 1.0}}, {{1, 0}, 5e6, {2.0, 2.0}}};
  const Mesh mesh(default_covariates(), cells);
  const auto x = build_design_matrix(parse_formula("D ~ 1"), mesh, false);
  EXPECT_NEAR(total_abundance(std::vector<double>{std::log(2.0)}, x, mesh), 16.0, 1e-13);
  EXPECT_NEAR(total_abundance(std::vector<double>{std::log(2.0)}, x, mesh, 1e4), 1600.0, 1e-10);
  EXPECT_LT(total_abundance(std::vector<double>{-700.0}, x, mesh), 1e-300);
}

TEST(Abundance, LinearInDensity) {
  const Mesh mesh = random_mesh(100, 4);
  const auto x = build_design_matrix(parse_formula("D ~ depth + distance_to_coast"), mesh, true);
  std::vector<double> beta{0.3, -0.4, 0.25};
  const double n = total_abundance(beta, x, mesh);
  for (double c : {0.5, 2.0, 17.0}) {
    auto scaled = beta;
    scaled[0] += std::log(c);
    EXPECT_NEAR(total_abundance(scaled, x, mesh), c * n, 1e-12 * c * n);
  }
}

TEST(Design, OriginalScaleReproducesSurface) {
  const Mesh mesh = random_mesh(150, 5);
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 0.5);
  for (const char* text : {"D ~ depth + depth2 + distance_to_coast", "D ~ logdepth + distance_to_coast",
                           "D ~ s(distance_to_coast, k = 5, fx = TRUE) + depth"}) {
    const auto f = parse_formula(text);
    const auto std_x = build_design_matrix(f, mesh, true);
    const auto raw_x = build_design_matrix(f, mesh, false);
    std::vector<double> beta(std_x.cols());
    for (double& b : beta) b = z(rng);
    const auto orig = std_x.to_original_scale(beta);
    const auto a = log_density(beta, std_x);
    const auto b = log_density(orig, raw_x);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-9 * std::max(1.0, std::abs(a[i])));
    const auto back = std_x.from_original_scale(orig);
    for (std::size_t i = 0; i < beta.size(); ++i) EXPECT_NEAR(back[i], beta[i], 1e-10);
  }
}
