#include "ascr/numerics.hpp"

#include <algorithm>
#include <stdexcept>

namespace ascr {

namespace {
constexpr double kInvSqrtTwoPi = 0.39894228040143267794;
constexpr double kInvSqrtTwo = 0.70710678118654752440;
}  // namespace

double normal_pdf(double z) { return kInvSqrtTwoPi * std::exp(-0.5 * z * z); }

double normal_log_pdf(double z) { return -0.5 * z * z - 0.5 * kLogTwoPi; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrtTwo); }

double normal_log_sf(double z) {
  if (z < 35.0) return std::log(0.5 * std::erfc(z * kInvSqrtTwo));
  // Mills-ratio asymptotic series; truncation error below 1e-12 for z >= 35.
  const double iz2 = 1.0 / (z * z);
  const double series = 1.0 - iz2 * (1.0 - 3.0 * iz2 * (1.0 - 5.0 * iz2 * (1.0 - 7.0 * iz2)));
  return normal_log_pdf(z) - std::log(z) + std::log(series);
}

double log_bessel_i0(double x) {
  if (x < 0.0) x = -x;
  if (x <= 20.0) {
    const double q = 0.25 * x * x;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 500; ++k) {
      term *= q / (static_cast<double>(k) * k);
      sum += term;
      if (term < 1e-17 * sum) break;
    }
    return std::log(sum);
  }
  // I0(x) ~ e^x / sqrt(2 pi x) * sum_k ((2k-1)!!)^2 / (k! (8x)^k)
  double term = 1.0;
  double sum = 1.0;
  const double inv8x = 1.0 / (8.0 * x);
  for (int k = 1; k < 60; ++k) {
    const double next = term * (2.0 * k - 1.0) * (2.0 * k - 1.0) * inv8x / k;
    if (next > term) break;  // asymptotic series starts diverging
    term = next;
    sum += term;
    if (term < 1e-17 * sum) break;
  }
  return x - 0.5 * std::log(2.0 * std::numbers::pi * x) + std::log(sum);
}

double log_sum_exp(std::span<const double> values) {
  LogSumExp acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

double poisson_binomial_tail(std::span<const double> p, int m) {
  if (m <= 0) return 1.0;
  const int k = static_cast<int>(p.size());
  if (m > k) return 0.0;
  // tail[c] = P(at least c successes among the trials processed so far)
  std::vector<double> tail(static_cast<std::size_t>(m) + 1, 0.0);
  tail[0] = 1.0;
  for (int j = 0; j < k; ++j) {
    const double pj = p[static_cast<std::size_t>(j)];
    const int top = std::min(m, j + 1);
    for (int c = top; c >= 1; --c) {
      tail[static_cast<std::size_t>(c)] =
          pj * tail[static_cast<std::size_t>(c - 1)] + (1.0 - pj) * tail[static_cast<std::size_t>(c)];
    }
  }
  return tail[static_cast<std::size_t>(m)];
}

std::vector<double> poisson_binomial_pmf(std::span<const double> p, int max_count) {
  if (max_count < 0) throw std::invalid_argument("poisson_binomial_pmf: negative count");
  std::vector<double> pmf(static_cast<std::size_t>(max_count) + 1, 0.0);
  pmf[0] = 1.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double pj = p[j];
    for (int c = max_count; c >= 1; --c) {
      pmf[static_cast<std::size_t>(c)] =
          pj * pmf[static_cast<std::size_t>(c - 1)] + (1.0 - pj) * pmf[static_cast<std::size_t>(c)];
    }
    pmf[0] *= 1.0 - pj;
  }
  return pmf;
}

double logit(double p) { return std::log(p) - std::log1p(-p); }

double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace ascr
