#include "pof/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pof/error.hpp"

namespace pof {

void RangeSensor::validate() const {
  if (!(resolution > 0.0)) throw DomainError("sensor resolution must be positive");
  if (!(noise_sigma >= 0.0)) throw DomainError("sensor noise sigma must be non-negative");
  if (!(max_range > 0.0)) throw DomainError("sensor max range must be positive");
}

VehicleState integrate_step(const VehicleState& state, double accel_cmd, double dt,
                            double accel_bound) {
  if (!std::isfinite(state.position) || !std::isfinite(state.velocity) ||
      !std::isfinite(accel_cmd) || !std::isfinite(dt)) {
    throw InvalidState("non-finite input to integrate_step");
  }
  if (!(dt > 0.0)) throw DomainError("integration step must be positive");
  if (state.velocity < 0.0) throw InvalidState("negative vehicle velocity");

  double a = std::clamp(accel_cmd, -accel_bound, accel_bound);
  if (state.velocity + a * dt < 0.0) a = -state.velocity / dt;  // stop, no reverse

  VehicleState next = state;
  next.acceleration = a;
  next.position = state.position + state.velocity * dt + 0.5 * a * dt * dt;
  next.velocity = std::max(0.0, state.velocity + a * dt);
  return next;
}

std::optional<double> measure_range(const VehicleState& verifier,
                                    std::span<const VehicleState> scene,
                                    const RangeSensor& sensor, std::mt19937_64& rng) {
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& v : scene) {
    if (v.lane != verifier.lane) continue;
    const double gap = verifier.position - v.position;
    if (gap <= 0.0 || gap > sensor.max_range) continue;
    nearest = std::min(nearest, gap);
  }
  if (!std::isfinite(nearest)) return std::nullopt;

  double reading = nearest;
  if (sensor.noise_sigma > 0.0) {
    std::normal_distribution<double> noise(0.0, sensor.noise_sigma);
    reading += noise(rng);
  }
  return std::round(reading / sensor.resolution) * sensor.resolution;
}

void RouteTrace::append(const RouteSample& sample) {
  if (!samples_.empty() && !(sample.time > samples_.back().time)) {
    throw InvalidState("route samples must have strictly increasing timestamps");
  }
  samples_.push_back(sample);
}

}  // namespace pof
