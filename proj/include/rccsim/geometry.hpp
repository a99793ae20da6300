#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace rccsim {

class ModelError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Static geometry of a single-lift linear pavement project. All lengths in meters.
struct RoadSpec {
  double length = 44'000.0;
  double width = 11.0;
  double thickness = 0.2;
  double plant_chainage = 25'000.0;

  double cross_section() const { return width * thickness; }
  double total_volume() const { return length * width * thickness; }

  friend bool operator==(const RoadSpec&, const RoadSpec&) = default;
};

/// Haul speeds in km/h.
struct SpeedSpec {
  double loaded = 40.0;
  double empty = 50.0;

  friend bool operator==(const SpeedSpec&, const SpeedSpec&) = default;
};

// Volumes within this slack of the road total are accepted by front_position.
inline constexpr double kVolumeTolerance = 1e-6;

/// Chainage of the paving front after `volume_placed` m³ have been laid.
inline double front_position(double volume_placed, const RoadSpec& road) {
  if (volume_placed < -kVolumeTolerance ||
      volume_placed > road.total_volume() + kVolumeTolerance) {
    throw ModelError("placed volume " + std::to_string(volume_placed) +
                     " outside [0, " + std::to_string(road.total_volume()) + "]");
  }
  // Division need not round back to the length exactly; the end is exact.
  if (volume_placed >= road.total_volume()) return road.length;
  return std::clamp(volume_placed / road.cross_section(), 0.0, road.length);
}

inline double haul_distance(double front, const RoadSpec& road) {
  return std::abs(front - road.plant_chainage);
}

/// Minutes to cover `distance` meters at `speed_kmh`.
inline double travel_time(double distance, double speed_kmh) {
  return distance / 1000.0 / speed_kmh * 60.0;
}

}  // namespace rccsim
