#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace ascr {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// exp(x) for x <= 0, branch-free so loops over it vectorize. Relative error
/// stays within a few ulp; arguments below -708 (and -inf) are clamped, giving
/// about 3e-308 instead of 0.
inline double exp_nonpositive(double x) {
  constexpr double log2e = 1.4426950408889634074;
  constexpr double ln2_hi = 6.93147180369123816490e-01;
  constexpr double ln2_lo = 1.90821492927058770002e-10;
  constexpr double shifter = 6755399441055744.0;  // 1.5 * 2^52, rounds to an integer in the low bits
  const double xc = std::max(x, -708.0);
  const double kd = xc * log2e + shifter;
  const double k = kd - shifter;
  const double r = (xc - k * ln2_hi) - k * ln2_lo;
  // Taylor series to degree 12 on |r| <= ln2 / 2
  double p = 1.0 / 479001600.0;
  p = p * r + 1.0 / 39916800.0;
  p = p * r + 1.0 / 3628800.0;
  p = p * r + 1.0 / 362880.0;
  p = p * r + 1.0 / 40320.0;
  p = p * r + 1.0 / 5040.0;
  p = p * r + 1.0 / 720.0;
  p = p * r + 1.0 / 120.0;
  p = p * r + 1.0 / 24.0;
  p = p * r + 1.0 / 6.0;
  p = p * r + 0.5;
  p = p * r + 1.0;
  p = p * r + 1.0;
  const std::int64_t ki = std::bit_cast<std::int64_t>(kd) - std::bit_cast<std::int64_t>(shifter);
  const double scale = std::bit_cast<double>((ki + 1023) << 52);
  return p * scale;
}

/// Splits log(sum exp(v)) into max + log(sum exp(v - max)): returns the sum and
/// stores the max in `hi`. Overwrites v with the scaled exponentials. The sum
/// is 0 when every value is -inf.
inline double sum_exp_scaled(double* v, std::size_t n, double& hi) {
  double m0 = kNegInf, m1 = kNegInf, m2 = kNegInf, m3 = kNegInf;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    m0 = v[i] > m0 ? v[i] : m0;
    m1 = v[i + 1] > m1 ? v[i + 1] : m1;
    m2 = v[i + 2] > m2 ? v[i + 2] : m2;
    m3 = v[i + 3] > m3 ? v[i + 3] : m3;
  }
  for (; i < n; ++i) m0 = v[i] > m0 ? v[i] : m0;
  hi = std::max(std::max(m0, m1), std::max(m2, m3));
  if (hi == kNegInf || !(hi < std::numeric_limits<double>::infinity())) return hi == kNegInf ? 0.0 : 1.0;
  const double shift = hi;
  for (i = 0; i < n; ++i) v[i] = exp_nonpositive(v[i] - shift);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
  for (i = 0; i + 4 <= n; i += 4) {
    s0 += v[i];
    s1 += v[i + 1];
    s2 += v[i + 2];
    s3 += v[i + 3];
  }
  for (; i < n; ++i) s0 += v[i];
  return (s0 + s1) + (s2 + s3);
}

/// log(sum exp(v)) over n values; overwrites v with the scaled exponentials.
inline double log_sum_exp_inplace(double* v, std::size_t n) {
  if (n == 1) return v[0];
  double hi = kNegInf;
  const double sum = sum_exp_scaled(v, n, hi);
  if (hi == kNegInf || !(hi < std::numeric_limits<double>::infinity())) return hi;
  return hi + std::log(sum);
}
inline constexpr double kLogTwoPi = 1.8378770664093454836;  // log(2*pi)

/// Standard normal pdf.
double normal_pdf(double z);
double normal_log_pdf(double z);
/// Standard normal cdf.
double normal_cdf(double z);
/// log(1 - Phi(z)), accurate far into the upper tail.
double normal_log_sf(double z);

/// log I0(x) for x >= 0. Power series below 20, asymptotic expansion above.
double log_bessel_i0(double x);

/// Numerically stable log(sum(exp(values))). Returns -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> values);

// Streaming log-sum-exp accumulator. Order of additions is preserved, so
// identical input sequences give bit-identical results.
class LogSumExp {
 public:
  void add(double v) {
    if (v == kNegInf) return;
    if (v <= max_) {
      sum_ += std::exp(v - max_);
    } else {
      sum_ = sum_ * std::exp(max_ - v) + 1.0;
      max_ = v;
    }
  }
  double value() const { return max_ == kNegInf ? kNegInf : max_ + std::log(sum_); }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
};

/// P(at least m successes) for independent Bernoulli trials with success
/// probabilities p. Uses an upper-tail recursion, so tiny tails keep full
/// relative precision. Returns 1 for m <= 0 and 0 for m > p.size().
double poisson_binomial_tail(std::span<const double> p, int m);

/// P(exactly c successes) for c = 0..max_count.
std::vector<double> poisson_binomial_pmf(std::span<const double> p, int max_count);

double logit(double p);
double inv_logit(double x);

}  // namespace ascr
