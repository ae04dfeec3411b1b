#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ascr {

/// Planar projected coordinates in meters.
struct Point {
  double easting = 0.0;
  double northing = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

/// Distances below this are clamped so that log10(distance) stays finite.
inline constexpr double kMinDistance = 1.0;

/// Sensor positions of the survey array.
class SensorArray {
 public:
  /// Positions must be finite and pairwise distinct. A single sensor is
  /// accepted (useful for singleton diagnostics); likelihoods additionally
  /// require at least m_min sensors.
  explicit SensorArray(std::vector<Point> positions);

  std::size_t size() const { return positions_.size(); }
  const Point& operator[](std::size_t j) const { return positions_[j]; }
  std::span<const Point> positions() const { return positions_; }

  /// Euclidean distance from sensor j to x, clamped below at kMinDistance.
  double distance(std::size_t j, Point x) const;
  /// Bearing from sensor j to x in radians clockwise from north, in [0, 2pi).
  double true_bearing(std::size_t j, Point x) const;
  /// Distance from x to the closest sensor (unclamped).
  double nearest_distance(Point x) const;

 private:
  void check_index(std::size_t j) const;

  std::vector<Point> positions_;
};

/// Bearing in radians clockwise from north of `to` seen from `from`.
double bearing_between(Point from, Point to);

/// Wraps an angle to [0, 2pi).
double wrap_angle(double radians);

double degrees_to_radians(double degrees);
double radians_to_degrees(double radians);

}  // namespace ascr
