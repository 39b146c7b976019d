#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "pof/scenario.hpp"

namespace pof {

enum class SweepParameter { K, M, Lambda, Gamma };

std::string_view to_string(SweepParameter p);
std::optional<SweepParameter> parse_sweep_parameter(std::string_view s);

/// Copy of `base` with one parameter replaced. M widens or narrows the
/// checkpoint range symmetrically around d_ref.
ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepParameter parameter,
                                 double value);

struct SweepRow {
  double value = 0.0;
  int runs = 0;
  double mean_time = 0.0;  // verification time, s
  double std_time = 0.0;   // sample standard deviation
  double min_time = 0.0;
  double max_time = 0.0;
  double pass_rate = 0.0;  // fraction of ACCEPT verdicts
};

struct SweepResult {
  SweepParameter parameter = SweepParameter::K;
  std::vector<SweepRow> rows;
};

/// Runs `seeds` scenarios per grid value, seeds base.seed .. base.seed +
/// seeds - 1. Rows follow grid order.
SweepResult run_sweep(const ScenarioConfig& base, SweepParameter parameter,
                      std::span<const double> grid, int seeds = 30, unsigned threads = 0);

struct SecurityRow {
  int K = 0;
  long N = 0;
  long M = 0;
  std::vector<long> steps;  // walk steps per challenge used by the analytic columns
  MonteCarloEstimate interior;  // every interior challenge answered by the follower
  MonteCarloEstimate accepted;  // verifier ACCEPT, boundary entries included
  double marginal_product = 0.0;  // product of per-challenge marginals
  double exact_forward = 0.0;     // joint, per-challenge step counts
  double exact_scheduled = 0.0;   // joint, the scenario's own timing
  double guess_bound = 0.0;       // (1/M)^K
  double steady_state = 0.0;
};

/// Probability, under the scenario's exact timing, that the random-walk
/// follower answers every interior challenge: a forward pass over (walk
/// state, last checkpoint, walk-step phase) averaged over uniform draws.
/// `t0` is the protocol start time of the scenario.
double scheduled_passing_probability(const ScenarioConfig& config, double t0);

/// Full remote-with-follower scenarios for each K, compared with the
/// analytic values.
std::vector<SecurityRow> run_security_sweep(const ScenarioConfig& base, std::span<const int> k_grid,
                                            long trials, unsigned threads = 0);

}  // namespace pof
