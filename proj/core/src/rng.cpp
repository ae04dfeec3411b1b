#include "ascr/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ascr/geometry.hpp"

namespace ascr {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t state = base;
  const std::uint64_t a = splitmix64(state);
  state = a ^ index;
  return splitmix64(state);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  double u = 0.0;
  do {
    u = uniform();
  } while (u == 0.0);
  return u;
}

std::uint64_t Rng::uniform_index(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_index: empty range");
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v = 0;
  do {
    v = engine_();
  } while (v >= limit);
  return v % n;
}

double Rng::normal() {
  // Box-Muller, one variate per pair of uniforms
  const double u1 = uniform_open();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson: invalid mean");
  if (mean == 0.0) return 0;
  if (mean < 10.0) {
    // Knuth multiplication method
    const double limit = std::exp(-mean);
    std::uint64_t k = 0;
    double prod = uniform_open();
    while (prod > limit) {
      ++k;
      prod *= uniform_open();
    }
    return k;
  }
  // PTRS transformed rejection (Hormann 1993)
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double vr = 0.9277 - 3.6224 / (b - 2.0);
  while (true) {
    const double u = uniform() - 0.5;
    const double v = uniform_open();
    const double us = 0.5 - std::abs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - std::lgamma(k + 1.0)) {
      return static_cast<std::uint64_t>(k);
    }
  }
}

double Rng::von_mises(double mu, double kappa) {
  if (kappa < 0.0) throw std::invalid_argument("von_mises: negative concentration");
  if (kappa < 1e-8) return wrap_angle(mu + 2.0 * std::numbers::pi * uniform());
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  double f = 0.0;
  while (true) {
    const double u1 = uniform();
    const double z = std::cos(std::numbers::pi * u1);
    f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    const double u2 = uniform_open();
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) break;
  }
  const double u3 = uniform();
  const double theta = u3 > 0.5 ? std::acos(f) : -std::acos(f);
  return wrap_angle(mu + theta);
}

double Rng::truncated_normal_above(double mean, double sd, double lower) {
  if (!(sd > 0.0)) throw std::invalid_argument("truncated normal: sd must be positive");
  if ((lower - mean) / sd > 8.0) throw std::invalid_argument("truncated normal: acceptance rate too small");
  while (true) {
    const double x = normal(mean, sd);
    if (x > lower) return x;
  }
}

}  // namespace ascr
