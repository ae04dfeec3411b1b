#pragma once

#include <cstdint>
#include <random>

namespace ascr {

/// SplitMix64 step: advances `state` and returns the next output.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed of stream `index` derived from `base`: two SplitMix64 rounds over
/// base and index, so neighbouring indices give unrelated streams.
std::uint64_t stream_seed(std::uint64_t base, std::uint64_t index);

/// Portable random variates on top of std::mt19937_64. All transforms are
/// implemented here so sequences are identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform on (0, 1).
  double uniform_open();
  /// Uniform integer in [0, n).
  std::uint64_t uniform_index(std::uint64_t n);
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t poisson(double mean);
  /// Von Mises variate centred at mu (radians) by the Best-Fisher rejection method, in [0, 2pi).
  double von_mises(double mu, double kappa);
  /// Normal(mean, sd) truncated to (lower, inf), by rejection from the untruncated normal.
  double truncated_normal_above(double mean, double sd, double lower);

 private:
  std::mt19937_64 engine_;
};

}  // namespace ascr
