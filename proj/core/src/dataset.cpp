#include "ascr/dataset.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "ascr/error.hpp"

namespace ascr {

int Dataset::detections(std::size_t i) const {
  int count = 0;
  for (std::size_t j = 0; j < sensors; ++j) count += omega[i * sensors + j] != 0;
  return count;
}

void Dataset::add_call(std::span<const std::uint8_t> w, std::span<const double> y, std::span<const double> r,
                       std::span<const double> c) {
  if (w.size() != sensors || y.size() != sensors || r.size() != sensors) {
    throw DataError("call row length differs from the sensor count");
  }
  if (!c.empty() && c.size() != sensors) throw DataError("noise row length differs from the sensor count");
  if (size() > 0 && c.empty() == has_noise()) throw DataError("noise must be given for every call or for none");
  omega.insert(omega.end(), w.begin(), w.end());
  bearings.insert(bearings.end(), y.begin(), y.end());
  received.insert(received.end(), r.begin(), r.end());
  noise.insert(noise.end(), c.begin(), c.end());
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.sensors = sensors;
  out.m_min = m_min;
  out.period = period;
  const std::size_t n = size();
  for (std::size_t i : rows) {
    if (i >= n) throw std::out_of_range("dataset row index out of range");
    const auto first = static_cast<std::ptrdiff_t>(i * sensors);
    const auto last = first + static_cast<std::ptrdiff_t>(sensors);
    out.omega.insert(out.omega.end(), omega.begin() + first, omega.begin() + last);
    out.bearings.insert(out.bearings.end(), bearings.begin() + first, bearings.begin() + last);
    out.received.insert(out.received.end(), received.begin() + first, received.begin() + last);
    if (has_noise()) out.noise.insert(out.noise.end(), noise.begin() + first, noise.begin() + last);
  }
  return out;
}

void Dataset::validate(double t_r) const {
  if (sensors == 0) throw DataError("dataset has no sensors");
  if (omega.size() % sensors != 0 || bearings.size() != omega.size() || received.size() != omega.size()) {
    throw DataError("dataset matrices have inconsistent shapes");
  }
  if (has_noise() && noise.size() != omega.size()) throw DataError("noise matrix shape differs from detections");
  if (m_min < 1) throw DataError("m_min must be at least 1");
  if (!(period > 0.0)) throw DataError("study period must be positive");
  const std::size_t n = size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string row = "call " + std::to_string(i);
    if (detections(static_cast<std::size_t>(i)) < m_min) {
      throw DataError(row + " has fewer than " + std::to_string(m_min) + " detections");
    }
    for (std::size_t j = 0; j < sensors; ++j) {
      const std::size_t at = i * sensors + j;
      const bool det = omega[at] != 0;
      if (omega[at] > 1) throw DataError(row + ": detection flags must be 0 or 1");
      if (det != std::isfinite(bearings[at]) || det != std::isfinite(received[at])) {
        throw DataError(row + ", sensor " + std::to_string(j) +
                        ": bearing and received level must be present exactly where detected");
      }
      if (det && received[at] < t_r) {
        throw DataError(row + ", sensor " + std::to_string(j) + ": received level " + std::to_string(received[at]) +
                        " dB is below the threshold " + std::to_string(t_r) + " dB");
      }
      if (has_noise() && !std::isfinite(noise[at])) throw DataError(row + ": non-finite noise level");
    }
  }
}

double Dataset::min_received() const {
  double out = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < omega.size(); ++k) {
    if (omega[k] && received[k] < out) out = received[k];
  }
  return out;
}

}  // namespace ascr
