#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace ascr {

/// Multiply-detected calls: detection histories with bearings and received
/// levels, stored row-major (call i, sensor j at i * K + j). Bearings are in
/// radians; missing entries (non-detections) hold NaN.
struct Dataset {
  std::size_t sensors = 0;
  std::vector<std::uint8_t> omega;
  std::vector<double> bearings;
  std::vector<double> received;
  std::vector<double> noise;  // optional per-call noise, dB; empty or n x K
  int m_min = 2;
  double period = 1.0;

  std::size_t size() const { return sensors == 0 ? 0 : omega.size() / sensors; }
  bool detected(std::size_t i, std::size_t j) const { return omega[i * sensors + j] != 0; }
  double bearing(std::size_t i, std::size_t j) const { return bearings[i * sensors + j]; }
  double received_level(std::size_t i, std::size_t j) const { return received[i * sensors + j]; }
  bool has_noise() const { return !noise.empty(); }
  int detections(std::size_t i) const;

  /// Appends one call. `noise` may be empty when the dataset carries no noise.
  void add_call(std::span<const std::uint8_t> w, std::span<const double> y, std::span<const double> r,
                std::span<const double> c = {});

  /// Rows in the given order (duplicates allowed), keeping m_min and period.
  Dataset subset(std::span<const std::size_t> rows) const;

  /// Throws DataError when shapes disagree, a row has fewer than m_min
  /// detections, values are missing where detected (or present where not),
  /// or a received level is below t_r.
  void validate(double t_r) const;

  /// Smallest received level over all detections (+inf for an empty dataset).
  double min_received() const;
};

}  // namespace ascr
