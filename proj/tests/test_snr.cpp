#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "ascr/error.hpp"
#include "ascr/snr.hpp"
#include "oracles.hpp"

using namespace ascr;
using oracle::rel_diff;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Per-call noise at t_r everywhere and a single noise row at t_r, with a step
// curve of height g0: the SNR model collapses onto the threshold model.
void make_step_limit(oracle::Tiny& t) {
  t.params.jan = {t.params.det.g0, kInf, 2.0};
  t.data.noise.assign(t.data.omega.size(), t.params.det.t_r);
  t.noise.values.assign(t.noise.sensors, t.params.det.t_r);
}

}  // namespace

TEST(Janoschek, Examples) {
  const JanoschekParams jp{0.8, 0.1, 2.0};
  EXPECT_EQ(janoschek_p(0.0, jp), 0.0);
  EXPECT_EQ(janoschek_p(-4.0, jp), 0.0);
  EXPECT_NEAR(janoschek_p(3.0, jp), 0.8 * (1.0 - std::exp(-0.9)), 1e-15);
  EXPECT_NEAR(janoschek_p(3.0, jp), 0.4747443, 1e-7);
  EXPECT_NEAR(janoschek_p(1e3, jp), 0.8, 1e-15);
  double prev = 0.0;
  for (double s = 0.0; s < 30.0; s += 0.25) {
    const double p = janoschek_p(s, jp);
    EXPECT_GE(p, prev);
    EXPECT_LE(p, 0.8);
    prev = p;
  }
}

TEST(SnrDetection, StepLimitIsThresholdForm) {
  const PropagationParams prop{18.0, 2.7};
  for (double e : {90.0, 96.0, 99.5, 104.0}) {
    const double c = 96.0;
    const double step = snr_detection_function(e, c, {0.6, kInf, 2.0}, prop);
    EXPECT_NEAR(step, detect_prob_from_level(e, {0.6, c}, prop), 1e-14);
    // large finite rates approach the step from below
    const double steep = snr_detection_function(e, c, {0.6, 1e4, 2.0}, prop);
    EXPECT_NEAR(steep, step, 2e-3);
    EXPECT_LE(steep, step);
  }
}

TEST(SnrDetection, MatchesSimpsonOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const JanoschekParams jp{0.5 + 0.5 * u(rng), 0.02 + u(rng), rep % 2 ? 2.0 : 3.0};
    const PropagationParams prop{15.0, 1.5 + 3.0 * u(rng)};
    const double e = 85.0 + 25.0 * u(rng);
    const double c = 88.0 + 8.0 * u(rng);
    const double got = snr_detection_function(e, c, jp, prop);
    const double want = oracle::snr_detection(e, c, jp, prop.sigma_r);
    EXPECT_NEAR(got, want, 1e-9) << e << " " << c;
  }
}

TEST(SnrDetection, Limits) {
  const JanoschekParams jp{0.8, 0.2, 2.0};
  // vanishing received-level noise: g -> p(E - c)
  EXPECT_NEAR(snr_detection_function(100.0, 95.0, jp, {15.0, 1e-3}), janoschek_p(5.0, jp), 1e-4);
  // hopeless SNR
  EXPECT_LT(snr_detection_function(60.0, 100.0, jp, {15.0, 2.0}), 1e-12);
  // monotone in E and in -c, bounded by theta_U
  double prev = 0.0;
  for (double e = 80.0; e < 120.0; e += 1.0) {
    const double g = snr_detection_function(e, 95.0, jp, {15.0, 2.5});
    EXPECT_GE(g, prev);
    EXPECT_LE(g, jp.theta_U);
    prev = g;
  }
  prev = 0.0;
  for (double c = 110.0; c > 80.0; c -= 1.0) {
    const double g = snr_detection_function(100.0, c, jp, {15.0, 2.5});
    EXPECT_GE(g, prev);
    prev = g;
  }
}

TEST(SnrDetection, ReceivedLevelFactorIntegratesToOne) {
  // p(r - c) phi((r - E) / sigma) / sigma / g over r in [c, inf)
  const JanoschekParams jp{0.7, 0.3, 2.0};
  const double sigma = 2.5;
  for (double e : {92.0, 97.0, 103.0}) {
    const double c = 95.0;
    const double g = snr_detection_function(e, c, jp, {15.0, sigma});
    auto f = [&](double r) { return janoschek_p(r - c, jp) * oracle::normal_pdf((r - e) / sigma) / sigma / g; };
    const double total = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, c, e + 15.0 * sigma, 15, 1e-13);
    EXPECT_NEAR(total, 1.0, 1e-8);
  }
}

TEST(SnrLikelihood, MatchesBruteForce) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 12; ++rep) {
    oracle::TinyShape s;
    s.sensors = 2 + rep % 2;
    s.cells = 1 + rep % 4;
    s.nodes = 1 + rep % 3;
    s.calls = 1 + rep % 3;
    s.with_noise = true;
    s.options.bearing = rep % 3 == 0 ? BearingModel::mixture : BearingModel::single;
    const auto t = oracle::random_tiny(rng, s);
    const SnrLikelihood lik(*t.geom, *t.design, *t.grid, t.data, t.noise, t.options);
    const auto want = oracle::snr_likelihood(*t.geom, *t.design, *t.grid, t.data, t.noise, t.params, t.options);
    const auto got = lik.evaluate(t.params);
    SCOPED_TRACE(rep);
    EXPECT_LE(rel_diff(got.full, want.full), 1e-8) << got.full << " vs " << want.full;
    EXPECT_LE(rel_diff(got.conditional, want.conditional), 1e-8);
    EXPECT_LE(rel_diff(got.lambda, want.lambda), 1e-8);
    EXPECT_LE(rel_diff(lik.expected_singletons(t.params), want.singletons), 1e-8);
  }
}

TEST(SnrLikelihood, StepLimitBridgesToThresholdModel) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 10; ++rep) {
    oracle::TinyShape s;
    s.with_noise = true;
    s.options.bearing = BearingModel::single;
    auto t = oracle::random_tiny(rng, s);
    make_step_limit(t);
    const auto snr = SnrLikelihood(*t.geom, *t.design, *t.grid, t.data, t.noise, t.options).evaluate(t.params);
    const auto thr = Likelihood(*t.geom, *t.design, *t.grid, t.data, t.options).evaluate(t.params);
    EXPECT_LE(rel_diff(snr.full, thr.full), 1e-6);
    EXPECT_LE(rel_diff(snr.lambda, thr.lambda), 1e-6);
  }
}

TEST(SnrLikelihood, NoiseRowAverage) {
  std::mt19937_64 rng(9);
  oracle::TinyShape s;
  s.with_noise = true;
  s.calls = 1;
  auto t = oracle::random_tiny(rng, s);
  const std::size_t k = t.noise.sensors;
  NoiseSample first{k, {t.noise.values.begin(), t.noise.values.begin() + static_cast<std::ptrdiff_t>(k)}};
  NoiseSample second{k, {t.noise.values.begin() + static_cast<std::ptrdiff_t>(k), t.noise.values.end()}};
  const double both = SnrLikelihood(*t.geom, *t.design, *t.grid, t.data, t.noise, t.options).lambda(t.params);
  const double a = SnrLikelihood(*t.geom, *t.design, *t.grid, t.data, first, t.options).lambda(t.params);
  const double b = SnrLikelihood(*t.geom, *t.design, *t.grid, t.data, second, t.options).lambda(t.params);
  EXPECT_NEAR(both, 0.5 * (a + b), 1e-13 * both);
  // identical rows equal the single-row rate
  NoiseSample twice{k, first.values};
  twice.values.insert(twice.values.end(), first.values.begin(), first.values.end());
  EXPECT_EQ(SnrLikelihood(*t.geom, *t.design, *t.grid, t.data, twice, t.options).lambda(t.params), a);
  // deafening noise
  NoiseSample loud{k, std::vector<double>(k, 300.0)};
  EXPECT_LT(SnrLikelihood(*t.geom, *t.design, *t.grid, t.data, loud, t.options).lambda(t.params), 1e-12);
}

TEST(SnrLikelihood, MissingNoiseIsDataError) {
  std::mt19937_64 rng(11);
  auto t = oracle::random_tiny(rng, {});
  EXPECT_THROW(SnrLikelihood(*t.geom, *t.design, *t.grid, t.data, t.noise, t.options), DataError);
}
