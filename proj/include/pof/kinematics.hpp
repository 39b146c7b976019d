#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

namespace pof {

inline constexpr double kDefaultAccelBound = 4.0;  // m/s^2

/// Longitudinal state of one vehicle on a single road axis.
struct VehicleState {
  double position = 0.0;      // m
  double velocity = 0.0;      // m/s, never negative
  double acceleration = 0.0;  // m/s^2
  int lane = 0;
};

/// Rear-facing ranging sensor mounted on the verifier.
struct RangeSensor {
  double resolution = 0.3;  // rho, m
  double noise_sigma = 0.0;
  double max_range = 150.0;

  void validate() const;
};

/// Advances a vehicle by one step of length `dt` under the commanded
/// acceleration. The command is clamped to +/- `accel_bound`, and the
/// vehicle never reverses: if the command would drive the velocity below
/// zero it stops exactly at the end of the step.
VehicleState integrate_step(const VehicleState& state, double accel_cmd, double dt,
                            double accel_bound = kDefaultAccelBound);

/// Distance from the verifier to the nearest vehicle behind it in the same
/// lane and within `sensor.max_range`. Gaussian noise is added before the
/// reading is rounded to the nearest multiple of the sensor resolution.
/// Entries of `scene` at or ahead of the verifier are ignored, so the scene
/// may include the verifier itself.
std::optional<double> measure_range(const VehicleState& verifier,
                                    std::span<const VehicleState> scene,
                                    const RangeSensor& sensor, std::mt19937_64& rng);

struct RouteSample {
  double position;
  int lane;
  double time;
};

/// Time-ordered positions of one vehicle.
class RouteTrace {
 public:
  /// Throws InvalidState unless `sample.time` is strictly after the last one.
  void append(const RouteSample& sample);

  const std::vector<RouteSample>& samples() const { return samples_; }
  bool empty() const { return samples_.empty(); }
  std::size_t size() const { return samples_.size(); }

 private:
  std::vector<RouteSample> samples_;
};

}  // namespace pof
