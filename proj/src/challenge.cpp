#include "pof/challenge.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "pof/error.hpp"

namespace pof {

namespace {

// Guards the floor in the checkpoint count against representation error
// (30 / 0.6 is not exactly 50 in binary).
constexpr double kCountSlack = 1e-9;

double leg_deadline(double from, double to, double velocity, const ChallengeConfig& config,
                    const AccParams& acc) {
  if (config.deadline_policy == DeadlinePolicy::Simple) {
    return simple_deadline(to, from, config.v_rel, 0.0);
  }
  return compute_deadline(from, to, velocity, velocity, acc).deadline;
}

double velocity_at(std::span<const VelocitySample> trace, double t) {
  auto it = std::lower_bound(trace.begin(), trace.end(), t,
                             [](const VelocitySample& s, double x) { return s.time < x; });
  if (it == trace.end()) return trace.back().velocity;
  if (it == trace.begin()) return it->velocity;
  const auto prev = std::prev(it);
  return (t - prev->time <= it->time - t) ? prev->velocity : it->velocity;
}

}  // namespace

bool CheckpointSpace::contains(double distance, double tolerance) const {
  return std::any_of(checkpoints.begin(), checkpoints.end(),
                     [&](double s) { return std::abs(s - distance) <= tolerance; });
}

CheckpointSpace build_checkpoint_space(double verifier_velocity, double g_min, double g_max,
                                       double rho) {
  if (!(verifier_velocity > 0.0)) throw DomainError("verifier velocity must be positive");
  if (!(g_min > 0.0) || !(g_min < g_max)) throw DomainError("need 0 < g_min < g_max");
  if (!(rho > 0.0)) throw DomainError("radar resolution must be positive");

  const double spacing = 2.0 * rho;
  const double span = (g_max - g_min) * verifier_velocity;
  const auto count = static_cast<std::size_t>(std::floor(span / spacing + kCountSlack)) + 1;

  CheckpointSpace space;
  space.spacing = spacing;
  space.lower = g_min * verifier_velocity;
  space.upper = g_max * verifier_velocity;
  space.checkpoints.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    space.checkpoints.push_back(space.lower + static_cast<double>(i) * spacing);
  }
  return space;
}

void ChallengeConfig::validate(double verifier_velocity) const {
  if (K < 0) throw DomainError("K must be non-negative");
  if (!(g_min > 0.0) || !(g_min < g_max)) throw DomainError("need 0 < g_min < g_max");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  if (!(gamma > 0.0)) throw DomainError("gamma must be positive");
  if (!(epsilon >= 0.0)) throw DomainError("epsilon must be non-negative");
  if (deadline_policy == DeadlinePolicy::Simple && !(v_rel > 0.0)) {
    throw DomainError("v_rel must be positive");
  }
  if (g_min * verifier_velocity < min_safety_gap) {
    throw DomainError("g_min * v_V is below the minimum safety gap");
  }
}

ChallengeSet schedule_challenges(std::span<const double> checkpoints, const ChallengeConfig& config,
                                 double d_ref, double verifier_velocity, const AccParams& acc,
                                 double t0) {
  ChallengeSet set;
  set.entries.reserve(checkpoints.size() + 2);
  set.entries.push_back({d_ref, 0.0, t0, verifier_velocity, false});

  double previous = d_ref;
  double t = t0;
  const auto append = [&](double distance) {
    const double deadline = leg_deadline(previous, distance, verifier_velocity, config, acc);
    t += deadline + config.epsilon;
    set.entries.push_back({distance, deadline, t, verifier_velocity, false});
    previous = distance;
  };
  for (double d : checkpoints) append(d);
  append(d_ref);
  return set;
}

ChallengeSet generate_challenges(const CheckpointSpace& space, const ChallengeConfig& config,
                                 double d_ref, double verifier_velocity, const AccParams& acc,
                                 std::mt19937_64& rng, double t0) {
  config.validate(verifier_velocity);
  if (space.checkpoints.empty()) throw DomainError("empty checkpoint space");
  if (d_ref < space.checkpoints.front() - 1e-9 || d_ref > space.checkpoints.back() + 1e-9) {
    throw DomainError("d_ref lies outside the checkpoint range");
  }
  std::uniform_int_distribution<std::size_t> pick(0, space.size() - 1);
  std::vector<double> drawn;
  drawn.reserve(static_cast<std::size_t>(config.K));
  for (int k = 0; k < config.K; ++k) drawn.push_back(space.checkpoints[pick(rng)]);
  return schedule_challenges(drawn, config, d_ref, verifier_velocity, acc, t0);
}

ChallengeSet generate_challenges(const CheckpointSpace& space, const ChallengeConfig& config,
                                 double d_ref, double verifier_velocity, const AccParams& acc,
                                 double t0) {
  std::mt19937_64 rng(config.rng_seed);
  return generate_challenges(space, config, d_ref, verifier_velocity, acc, rng, t0);
}

bool velocity_stable_at(std::span<const VelocitySample> trace, double t,
                        const StabilityCriteria& stability) {
  constexpr double kSlack = 1e-9;
  double lo = 0.0;
  double hi = 0.0;
  bool any = false;
  for (const auto& s : trace) {
    if (s.time < t - stability.hold - kSlack || s.time > t + kSlack) continue;
    lo = any ? std::min(lo, s.velocity) : s.velocity;
    hi = any ? std::max(hi, s.velocity) : s.velocity;
    any = true;
  }
  return any && (hi - lo) < stability.max_delta_v;
}

ChallengeSet adjust_deadlines(const ChallengeSet& challenges, std::span<const VelocitySample> trace,
                              AdjustPolicy policy, const AccParams& acc, double epsilon,
                              const StabilityCriteria& stability, std::size_t first_open) {
  if (policy == AdjustPolicy::None || trace.empty()) return challenges;
  if (challenges.entries.size() < 2) throw ProtocolError("challenge set lacks boundary entries");

  ChallengeSet out = challenges;
  for (std::size_t k = std::max<std::size_t>(first_open, 1); k < out.entries.size(); ++k) {
    const ChallengeEntry& from = out.entries[k - 1];
    ChallengeEntry& entry = out.entries[k];
    const double start = from.absolute_time;
    const double window_end = start + entry.deadline + epsilon;

    std::optional<double> onset;
    for (const auto& s : trace) {
      if (s.time <= start || s.time > window_end) continue;
      if (!velocity_stable_at(trace, s.time, stability)) {
        onset = s.time;
        break;
      }
    }

    const double v_start = velocity_at(trace, start);
    const bool speed_changed = std::abs(v_start - entry.planned_velocity) >= stability.max_delta_v;
    if (!onset && !speed_changed) {
      entry.absolute_time = start + entry.deadline + epsilon;
      continue;
    }

    if (!onset) {
      entry.deadline = compute_deadline(from.distance, entry.distance, v_start, v_start, acc).deadline;
      entry.planned_velocity = v_start;
      entry.absolute_time = start + entry.deadline + epsilon;
      continue;
    }

    std::optional<double> settled;
    for (const auto& s : trace) {
      if (s.time >= *onset && velocity_stable_at(trace, s.time, stability)) {
        settled = s.time;
        break;
      }
    }
    if (!settled) throw AdjustmentTimeout("verifier velocity did not stabilize");
    const double v_stable = velocity_at(trace, *settled);

    if (policy == AdjustPolicy::Recompute) {
      std::vector<double> profile;
      const double last = trace.back().time;
      const auto samples = static_cast<long>(std::floor((last - start) / acc.dt + 1e-9)) + 1;
      for (long i = 0; i < samples; ++i) {
        profile.push_back(velocity_at(trace, start + acc.dt * static_cast<double>(i)));
      }
      if (profile.empty()) profile.push_back(v_start);
      const auto maneuver = simulate_maneuver(from.distance, entry.distance, v_start, profile, acc);
      if (!maneuver.settle_time) throw NonConvergence("recomputed maneuver does not settle");
      entry.deadline = *maneuver.settle_time;
      entry.absolute_time = std::max(start + entry.deadline, *settled) + epsilon;
    } else {
      entry.deadline =
          compute_deadline(from.distance, entry.distance, v_stable, v_stable, acc).deadline;
      entry.absolute_time = *settled + entry.deadline + epsilon;
      entry.reissued = true;
    }
    entry.planned_velocity = v_stable;
  }
  return out;
}

}  // namespace pof
