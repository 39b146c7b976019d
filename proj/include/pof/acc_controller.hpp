#pragma once

#include <optional>
#include <span>
#include <vector>

#include "pof/kinematics.hpp"

namespace pof {

/// Gains and step sizes of the gap-regulating cruise controller.
struct AccParams {
  double lambda = 0.4;  // convergence gain, 1/s
  double tau = 0.5;     // actuation time constant, s
  double dt = 0.1;      // update step, s
  double gamma = 0.3;   // checkpoint tolerance, m
  int max_iters = 600;  // 60 s at the default step
  double max_accel = kDefaultAccelBound;

  void validate() const;
};

/// Recurrence state between two controller updates.
///
/// `delta` is the signed distance error to the checkpoint, positive when the
/// candidate is closer to the verifier than the checkpoint asks for.
struct ControllerState {
  double prev_accel = 0.0;
  double delta = 0.0;
  double candidate_velocity = 0.0;
  double verifier_velocity = 0.0;
};

struct DeadlineStep {
  double delta;
  double candidate_velocity;
  double acceleration;
};

struct DeadlineResult {
  double deadline = 0.0;  // dt * iterations
  int iterations = 0;
  bool converged = false;
  std::vector<DeadlineStep> trajectory;
};

/// -(1/T) * (rel_velocity + lambda * delta).
double desired_acceleration(double gap_time, double rel_velocity, double delta, double lambda);

/// First-order actuation lag: beta * desired + (1 - beta) * prev with
/// beta = dt / (tau + dt).
double smoothed_acceleration(double desired, double prev, double dt, double tau);

/// Acceleration the controller applies for one step toward `checkpoint`.
///
/// The gap time is T = checkpoint / candidate_velocity, re-evaluated every
/// step. The error fed to the control law is the time-gap spacing error
/// delta + T * (v_C - v_V): it equals delta at matched speeds and adds
/// relative-velocity damping while the vehicles separate or close. The
/// result is rate-limited by the actuation lag and clamped to
/// +/- params.max_accel.
double control_acceleration(double delta, double candidate_velocity, double verifier_velocity,
                            double prev_accel, double checkpoint, const AccParams& params);

/// One update of the distance-error recurrence at constant verifier speed.
ControllerState controller_step(const ControllerState& state, double checkpoint,
                                const AccParams& params);

/// Time the controller needs to move from `d_ref` to `checkpoint`: the first
/// step at which |delta| < gamma. Throws NonConvergence after max_iters.
DeadlineResult compute_deadline(double d_ref, double checkpoint, double candidate_velocity,
                                double verifier_velocity, const AccParams& params);

/// |d - d_ref| / v_rel + epsilon.
double simple_deadline(double checkpoint, double d_ref, double v_rel, double epsilon);

struct ManeuverResult {
  std::vector<DeadlineStep> trajectory;
  std::optional<double> first_entry;  // first time |delta| < gamma
  std::optional<double> settle_time;  // time after which |delta| stays < gamma
};

/// Runs the controller from `d_start` toward `checkpoint` while the verifier
/// follows `verifier_velocity` (one sample per step boundary, starting at the
/// maneuver start; the last sample is held). Verifier displacement per step
/// uses the trapezoid of consecutive samples, which matches the kinematic
/// integrator for piecewise-constant acceleration. Simulates
/// max(profile length, max_iters) steps.
ManeuverResult simulate_maneuver(double d_start, double checkpoint, double candidate_velocity,
                                 std::span<const double> verifier_velocity,
                                 const AccParams& params);

}  // namespace pof
