#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pof/acc_controller.hpp"
#include "pof/challenge.hpp"
#include "pof/markov.hpp"
#include "pof/protocol.hpp"

namespace pof {

enum class ScenarioKind {
  Honest,              // candidate follows the verifier and answers
  RemoteNoFollower,    // adversary elsewhere, nobody behind the verifier
  RemoteWithFollower,  // adversary elsewhere, unrelated random-walk follower behind
  MitmKnown,           // relay attack against a candidate that knows the verifier
  MitmUnknown,         // relay attack against an opportunistic candidate
  Traffic,             // honest run while the verifier slows behind a lead vehicle
};

std::string_view to_string(ScenarioKind k);
std::optional<ScenarioKind> parse_scenario_kind(std::string_view s);
std::string_view to_string(AdjustPolicy p);
std::optional<AdjustPolicy> parse_adjust_policy(std::string_view s);
std::string_view to_string(DeadlinePolicy p);
std::optional<DeadlinePolicy> parse_deadline_policy(std::string_view s);

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::Honest;

  double v_V = 30.0;  // m/s
  double v_C = 30.0;
  double d_ref = 45.0;  // 1.5 s at 30 m/s
  double g_min = 1.0;   // s
  double g_max = 2.0;
  double rho = 0.3;  // m
  int K = 5;
  double epsilon = 1.0;  // s
  AccParams acc;         // lambda, tau, dt, gamma
  DeadlinePolicy deadline_policy = DeadlinePolicy::AccModel;
  double v_rel = 1.0;
  double sigma = 0.0;  // sensor noise, m
  double max_range = 150.0;
  std::uint64_t seed = 1;

  AdjustPolicy adjust = AdjustPolicy::None;
  StabilityCriteria stability;

  double join_time = 1.0;       // s, candidate sends its request
  double latency = 0.1;         // s, one-way radio delay
  double challenge_lead = 1.0;  // s between issuing the challenge and t_0
  double clock_skew = 0.0;      // candidate clock minus verifier clock, s
  double min_safety_gap = 10.0;
  double horizon = 600.0;  // s after the join request before giving up

  double lead_velocity = 27.0;  // traffic
  double brake_decel = 1.0;
  double brake_delay = 4.0;  // s after t_0

  double walk_step_time = 1.0;  // s per follower step
  double walk_d_step = 0.0;     // m, 0 selects 2 * rho

  /// Interior checkpoints to use instead of a random draw.
  std::vector<double> fixed_checkpoints;
  bool record_trace = true;

  double gamma() const { return acc.gamma; }
  int challenge_count() const;
  ChallengeConfig challenge_config() const;
  CheckpointSpace checkpoint_space() const;
  RandomWalkModel walk_model() const;

  /// Throws DomainError on inconsistent settings.
  void validate() const;
};

struct TraceSample {
  double time;
  int vehicle;
  int lane;
  double position;
  double velocity;
  double acceleration;
};

struct ChallengeOutcome {
  double distance = 0.0;
  double deadline = 0.0;
  double absolute_time = 0.0;
  std::optional<double> measured;
  bool pass = false;
  bool reissued = false;
  /// Time the responding vehicle's controller needs, from the start of the
  /// leg, to settle within gamma of the checkpoint under the verifier's
  /// actual motion. Empty when no physical candidate is executing.
  std::optional<double> completion;
};

struct EventRecord {
  double time;
  std::string actor;
  std::string event;
  std::string detail;
};

struct ScenarioResult {
  ScenarioKind kind = ScenarioKind::Honest;
  std::uint64_t seed = 0;

  std::optional<Verdict> verdict;  // the verifier's decision on the requester
  std::string requester;           // identity the verifier challenged
  JoinCheck join_check = JoinCheck::Accept;
  Phase verifier_phase = Phase::Idle;
  Phase candidate_phase = Phase::Idle;
  AbortReason candidate_abort = AbortReason::None;

  ChallengeSet original_challenges;
  ChallengeSet challenges;  // as finally revised
  RecordedSet recorded;
  std::vector<ChallengeOutcome> outcomes;
  bool interior_pass = false;  // every d_1..d_K answered
  int revisions = 0;

  std::vector<std::string> vehicles;
  std::vector<TraceSample> trace;
  std::vector<SensorReading> sensor_feed;
  std::vector<EventRecord> events;

  double t0 = 0.0;
  double verification_time = 0.0;  // t_{K+1} - t_0
};

ScenarioResult run_scenario(const ScenarioConfig& config);

}  // namespace pof
