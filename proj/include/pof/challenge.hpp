#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "pof/acc_controller.hpp"

namespace pof {

/// Discrete set of candidate following distances, 2*rho apart.
struct CheckpointSpace {
  std::vector<double> checkpoints;
  double spacing = 0.0;
  double lower = 0.0;  // g_min * v_V
  double upper = 0.0;  // g_max * v_V

  std::size_t size() const { return checkpoints.size(); }
  bool contains(double distance, double tolerance = 1e-9) const;
};

CheckpointSpace build_checkpoint_space(double verifier_velocity, double g_min, double g_max,
                                       double rho);

enum class DeadlinePolicy { AccModel, Simple };

struct ChallengeConfig {
  int K = 5;
  double g_min = 1.0;
  double g_max = 2.0;
  double rho = 0.3;
  double gamma = 0.3;
  double epsilon = 1.0;
  double v_rel = 1.0;  // used by DeadlinePolicy::Simple
  DeadlinePolicy deadline_policy = DeadlinePolicy::AccModel;
  std::uint64_t rng_seed = 1;
  double min_safety_gap = 10.0;  // m; lower bound on g_min * v_V

  void validate(double verifier_velocity) const;
};

struct ChallengeEntry {
  double distance = 0.0;
  double deadline = 0.0;       // maneuver time from the previous entry, without epsilon
  double absolute_time = 0.0;  // measurement instant
  double planned_velocity = 0.0;  // verifier speed assumed when the deadline was derived
  bool reissued = false;

  bool operator==(const ChallengeEntry&) const = default;
};

/// Ordered challenges bracketed by (d_ref, t_0) and (d_ref, t_{K+1}).
struct ChallengeSet {
  std::vector<ChallengeEntry> entries;

  double t0() const { return entries.front().absolute_time; }
  double end_time() const { return entries.back().absolute_time; }
  int K() const { return static_cast<int>(entries.size()) - 2; }

  bool operator==(const ChallengeSet&) const = default;
};

/// Builds the challenge schedule for a fixed list of interior checkpoints.
/// Each maneuver's deadline runs from the previous entry's distance and is
/// followed by `config.epsilon` of slack.
ChallengeSet schedule_challenges(std::span<const double> checkpoints, const ChallengeConfig& config,
                                 double d_ref, double verifier_velocity, const AccParams& acc,
                                 double t0);

/// Draws `config.K` checkpoints uniformly (with replacement) from `space`
/// and schedules them.
ChallengeSet generate_challenges(const CheckpointSpace& space, const ChallengeConfig& config,
                                 double d_ref, double verifier_velocity, const AccParams& acc,
                                 std::mt19937_64& rng, double t0);

/// Same, seeded from `config.rng_seed`.
ChallengeSet generate_challenges(const CheckpointSpace& space, const ChallengeConfig& config,
                                 double d_ref, double verifier_velocity, const AccParams& acc,
                                 double t0);

enum class AdjustPolicy { None, Repeat, Recompute };

struct VelocitySample {
  double time;
  double velocity;
};

/// The verifier's speed is stable at time t when it varied by less than
/// `max_delta_v` over [t - hold, t].
struct StabilityCriteria {
  double max_delta_v = 0.1;
  double hold = 1.0;
};

/// Re-derives deadlines disturbed by changes of the verifier's speed.
///
/// Entries before `first_open` are treated as already measured and kept.
/// For every later maneuver the trace is scanned over its window; if the
/// verifier was unstable inside it, the challenge is either re-issued with a
/// fresh deadline once the speed is stable again (Repeat) or its deadline is
/// recomputed by replaying the controller against the recorded speed profile
/// (Recompute). Maneuvers that start at a speed other than the one their
/// deadline assumed get a deadline for the new speed. Later absolute times
/// shift accordingly.
///
/// Throws AdjustmentTimeout if a disturbed window never stabilizes within
/// the trace.
ChallengeSet adjust_deadlines(const ChallengeSet& challenges, std::span<const VelocitySample> trace,
                              AdjustPolicy policy, const AccParams& acc, double epsilon,
                              const StabilityCriteria& stability = {}, std::size_t first_open = 1);

/// Range of the samples in [t - hold, t] is below the threshold.
bool velocity_stable_at(std::span<const VelocitySample> trace, double t,
                        const StabilityCriteria& stability);

}  // namespace pof
