#include "ascr/geometry.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "ascr/error.hpp"

namespace ascr {

SensorArray::SensorArray(std::vector<Point> positions) : positions_(std::move(positions)) {
  if (positions_.empty()) throw ConfigError("sensor array must contain at least one sensor");
  for (std::size_t a = 0; a < positions_.size(); ++a) {
    const Point& p = positions_[a];
    if (!std::isfinite(p.easting) || !std::isfinite(p.northing)) {
      throw ConfigError("sensor " + std::to_string(a) + " has non-finite coordinates");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (positions_[b] == p) {
        throw ConfigError("sensors " + std::to_string(b) + " and " + std::to_string(a) +
                          " share the same position");
      }
    }
  }
}

void SensorArray::check_index(std::size_t j) const {
  if (j >= positions_.size()) {
    throw std::out_of_range("sensor index " + std::to_string(j) + " out of range for array of " +
                            std::to_string(positions_.size()));
  }
}

double SensorArray::distance(std::size_t j, Point x) const {
  check_index(j);
  const double d = std::hypot(x.easting - positions_[j].easting, x.northing - positions_[j].northing);
  return d < kMinDistance ? kMinDistance : d;
}

double SensorArray::true_bearing(std::size_t j, Point x) const {
  check_index(j);
  if (x == positions_[j]) {
    throw std::domain_error("bearing undefined: point coincides with sensor " + std::to_string(j));
  }
  return bearing_between(positions_[j], x);
}

double SensorArray::nearest_distance(Point x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Point& p : positions_) {
    best = std::min(best, std::hypot(x.easting - p.easting, x.northing - p.northing));
  }
  return best;
}

double bearing_between(Point from, Point to) {
  // atan2(east, north) measures clockwise from north.
  return wrap_angle(std::atan2(to.easting - from.easting, to.northing - from.northing));
}

double wrap_angle(double radians) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::fmod(radians, two_pi);
  if (r < 0.0) r += two_pi;
  if (r >= two_pi) r -= two_pi;
  return r;
}

double degrees_to_radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

double radians_to_degrees(double radians) { return radians * 180.0 / std::numbers::pi; }

}  // namespace ascr
