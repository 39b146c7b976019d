#include "pof/acc_controller.hpp"

#include <algorithm>
#include <cmath>

#include "pof/error.hpp"

namespace pof {

void AccParams::validate() const {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  if (!(tau > 0.0)) throw DomainError("tau must be positive");
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (max_iters <= 0) throw DomainError("max_iters must be positive");
  if (!(max_accel > 0.0)) throw DomainError("max_accel must be positive");
}

double desired_acceleration(double gap_time, double rel_velocity, double delta, double lambda) {
  if (!(gap_time > 0.0)) throw DomainError("gap time must be positive");
  return -(rel_velocity + lambda * delta) / gap_time;
}

double smoothed_acceleration(double desired, double prev, double dt, double tau) {
  if (!(tau > 0.0) || !(dt > 0.0)) throw DomainError("dt and tau must be positive");
  const double beta = dt / (tau + dt);
  return beta * desired + (1.0 - beta) * prev;
}

double control_acceleration(double delta, double candidate_velocity, double verifier_velocity,
                            double prev_accel, double checkpoint, const AccParams& params) {
  if (!(checkpoint > 0.0)) throw DomainError("checkpoint must be positive");
  if (!(candidate_velocity > 0.0)) {
    throw StalledCandidate("candidate velocity is zero with a positive checkpoint");
  }
  const double gap_time = checkpoint / candidate_velocity;
  const double rel_velocity = candidate_velocity - verifier_velocity;
  const double spacing_error = delta + gap_time * rel_velocity;
  const double desired = desired_acceleration(gap_time, rel_velocity, spacing_error, params.lambda);
  const double applied = smoothed_acceleration(desired, prev_accel, params.dt, params.tau);
  return std::clamp(applied, -params.max_accel, params.max_accel);
}

ControllerState controller_step(const ControllerState& state, double checkpoint,
                                const AccParams& params) {
  const double dt = params.dt;
  const double a = control_acceleration(state.delta, state.candidate_velocity,
                                        state.verifier_velocity, state.prev_accel, checkpoint,
                                        params);
  const double gain = state.candidate_velocity * dt + 0.5 * a * dt * dt;

  ControllerState next = state;
  next.prev_accel = a;
  next.delta = state.delta + gain - state.verifier_velocity * dt;
  next.candidate_velocity = std::max(0.0, state.candidate_velocity + a * dt);
  return next;
}

DeadlineResult compute_deadline(double d_ref, double checkpoint, double candidate_velocity,
                                double verifier_velocity, const AccParams& params) {
  params.validate();
  if (!(d_ref > 0.0) || !(checkpoint > 0.0)) throw DomainError("distances must be positive");
  if (!(candidate_velocity > 0.0) || !(verifier_velocity > 0.0)) {
    throw DomainError("velocities must be positive");
  }

  ControllerState state{0.0, checkpoint - d_ref, candidate_velocity, verifier_velocity};
  DeadlineResult result;
  if (std::abs(state.delta) < params.gamma) {
    result.converged = true;
    return result;
  }
  result.trajectory.reserve(static_cast<std::size_t>(params.max_iters));
  for (int n = 1; n <= params.max_iters; ++n) {
    state = controller_step(state, checkpoint, params);
    result.trajectory.push_back({state.delta, state.candidate_velocity, state.prev_accel});
    if (std::abs(state.delta) < params.gamma) {
      result.iterations = n;
      result.deadline = params.dt * n;
      result.converged = true;
      return result;
    }
  }
  throw NonConvergence("checkpoint not reached within max_iters");
}

double simple_deadline(double checkpoint, double d_ref, double v_rel, double epsilon) {
  if (!(v_rel > 0.0)) throw DomainError("relative velocity must be positive");
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
  return std::abs(checkpoint - d_ref) / v_rel + epsilon;
}

ManeuverResult simulate_maneuver(double d_start, double checkpoint, double candidate_velocity,
                                 std::span<const double> verifier_velocity,
                                 const AccParams& params) {
  params.validate();
  if (verifier_velocity.empty()) throw DomainError("verifier velocity profile is empty");
  const auto v_at = [&](std::size_t i) {
    return verifier_velocity[std::min(i, verifier_velocity.size() - 1)];
  };
  const std::size_t steps =
      std::max(verifier_velocity.size(), static_cast<std::size_t>(params.max_iters));

  ManeuverResult result;
  result.trajectory.reserve(steps);
  double delta = checkpoint - d_start;
  double v_c = candidate_velocity;
  double prev = 0.0;
  std::optional<std::size_t> last_outside;
  if (std::abs(delta) < params.gamma) {
    result.first_entry = 0.0;
  } else {
    last_outside = 0;
  }

  const double dt = params.dt;
  for (std::size_t n = 1; n <= steps; ++n) {
    const double v_v0 = v_at(n - 1);
    const double v_v1 = v_at(n);
    const double a = control_acceleration(delta, v_c, v_v0, prev, checkpoint, params);
    const double gain = v_c * dt + 0.5 * a * dt * dt;
    delta += gain - 0.5 * (v_v0 + v_v1) * dt;
    v_c = std::max(0.0, v_c + a * dt);
    prev = a;
    result.trajectory.push_back({delta, v_c, a});
    if (std::abs(delta) < params.gamma) {
      if (!result.first_entry) result.first_entry = dt * static_cast<double>(n);
    } else {
      last_outside = n;
    }
  }
  if (!last_outside) {
    result.settle_time = 0.0;
  } else if (*last_outside < steps) {
    result.settle_time = dt * static_cast<double>(*last_outside + 1);
  }
  return result;
}

}  // namespace pof
