#include "pof/sweep.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <map>
#include <numeric>

#include "pof/crypto.hpp"
#include "pof/error.hpp"
#include "pof/parallel.hpp"

namespace pof {

namespace {

constexpr std::array<std::pair<SweepParameter, std::string_view>, 4> kParamNames{{
    {SweepParameter::K, "K"},
    {SweepParameter::M, "M"},
    {SweepParameter::Lambda, "lambda"},
    {SweepParameter::Gamma, "gamma"},
}};

double leg_time(const ScenarioConfig& c, double from, double to) {
  const double deadline = c.deadline_policy == DeadlinePolicy::Simple
                              ? simple_deadline(to, from, c.v_rel, 0.0)
                              : compute_deadline(from, to, c.v_V, c.v_V, c.acc).deadline;
  return deadline + c.epsilon;
}

double quantize(double d, double rho) { return std::round(d / rho) * rho; }

std::uint64_t trial_seed(std::uint64_t base, int k, long trial) {
  std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(k + 1)) ^
                    (0xc2b2ae3d27d4eb4fULL * static_cast<std::uint64_t>(trial + 1));
  return splitmix64(s);
}

}  // namespace

std::string_view to_string(SweepParameter p) {
  for (const auto& [e, name] : kParamNames) {
    if (e == p) return name;
  }
  return "?";
}

std::optional<SweepParameter> parse_sweep_parameter(std::string_view s) {
  for (const auto& [e, name] : kParamNames) {
    if (name == s) return e;
  }
  return std::nullopt;
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepParameter parameter,
                                 double value) {
  ScenarioConfig c = base;
  switch (parameter) {
    case SweepParameter::K:
      if (value < 0 || value != std::floor(value)) throw DomainError("K must be a whole number");
      c.K = static_cast<int>(value);
      c.fixed_checkpoints.clear();
      break;
    case SweepParameter::M: {
      if (value < 2 || value != std::floor(value)) throw DomainError("M must be a whole number >= 2");
      const double half = (value - 1.0) * c.rho;
      c.g_min = (c.d_ref - half) / c.v_V;
      c.g_max = (c.d_ref + half) / c.v_V;
      break;
    }
    case SweepParameter::Lambda: c.acc.lambda = value; break;
    case SweepParameter::Gamma: c.acc.gamma = value; break;
  }
  return c;
}

SweepResult run_sweep(const ScenarioConfig& base, SweepParameter parameter,
                      std::span<const double> grid, int seeds, unsigned threads) {
  if (grid.empty()) throw DomainError("sweep grid is empty");
  if (seeds < 1) throw DomainError("need at least one seed per point");

  std::vector<ScenarioConfig> configs;
  configs.reserve(grid.size());
  for (double v : grid) {
    auto c = apply_sweep_value(base, parameter, v);
    c.kind = ScenarioKind::Honest;
    c.record_trace = false;
    c.validate();
    configs.push_back(std::move(c));
  }

  const std::size_t per_point = static_cast<std::size_t>(seeds);
  std::vector<double> times(grid.size() * per_point);
  std::vector<char> accepted(grid.size() * per_point);
  parallel_for(times.size(), threads, [&](std::size_t job) {
    ScenarioConfig c = configs[job / per_point];
    c.seed = base.seed + job % per_point;
    const auto r = run_scenario(c);
    times[job] = r.verification_time;
    accepted[job] = r.verdict == Verdict::Accept;
  });

  SweepResult result;
  result.parameter = parameter;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto first = times.begin() + static_cast<std::ptrdiff_t>(g * per_point);
    const auto last = first + static_cast<std::ptrdiff_t>(per_point);
    const double n = static_cast<double>(per_point);
    SweepRow row;
    row.value = grid[g];
    row.runs = seeds;
    row.mean_time = std::accumulate(first, last, 0.0) / n;
    double ss = 0.0;
    for (auto it = first; it != last; ++it) ss += (*it - row.mean_time) * (*it - row.mean_time);
    row.std_time = per_point > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    row.min_time = *std::min_element(first, last);
    row.max_time = *std::max_element(first, last);
    const auto acc_first = accepted.begin() + static_cast<std::ptrdiff_t>(g * per_point);
    row.pass_rate =
        static_cast<double>(std::count(acc_first, acc_first + static_cast<std::ptrdiff_t>(per_point), 1)) / n;
    result.rows.push_back(row);
  }
  return result;
}

double scheduled_passing_probability(const ScenarioConfig& config, double t0) {
  const auto model = config.walk_model();
  if (model.n > kMaxExactStates) throw DomainError("state space too large for the exact computation");
  const auto p = build_transition_matrix<double>(model.n);
  const auto space = config.checkpoint_space();
  const std::size_t m = space.size();
  const double dt = config.acc.dt;
  const long period = std::max(1L, std::lround(config.walk_step_time / dt));
  const int k_count = config.challenge_count();

  // States whose noiseless reading passes each checkpoint.
  std::vector<RowVectorX<double>> masks(m, RowVectorX<double>::Zero(model.n));
  for (std::size_t c = 0; c < m; ++c) {
    for (Eigen::Index i = 0; i < model.n; ++i) {
      const double reading = quantize(model.distance(i), config.rho);
      if (std::abs(reading - space.checkpoints[c]) <= config.gamma() + 1e-9) masks[c](i) = 1.0;
    }
  }

  // Leg lengths in ticks; row m is the reference distance.
  std::vector<std::vector<long>> legs(m + 1, std::vector<long>(m));
  long longest = 0;
  for (std::size_t from = 0; from <= m; ++from) {
    const double d_from = from == m ? config.d_ref : space.checkpoints[from];
    for (std::size_t to = 0; to < m; ++to) {
      legs[from][to] = std::lround(leg_time(config, d_from, space.checkpoints[to]) / dt);
      longest = std::max(longest, legs[from][to]);
    }
  }
  std::vector<MatrixX<double>> powers;
  powers.push_back(MatrixX<double>::Identity(model.n, model.n));
  for (long s = 1; s <= (longest + period) / period; ++s) powers.push_back(powers.back() * p);

  const long tick0 = std::lround(t0 / dt);
  RowVectorX<double> start = RowVectorX<double>::Constant(model.n, 1.0 / static_cast<double>(model.n));
  start = start * n_step_matrix(p, tick0 / period);

  // key = last checkpoint (m for the reference) * period + phase
  std::map<long, RowVectorX<double>> frontier;
  frontier.emplace(static_cast<long>(m) * period + tick0 % period, start);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (int k = 0; k < k_count; ++k) {
    std::map<long, RowVectorX<double>> next;
    for (const auto& [key, alpha] : frontier) {
      const auto from = static_cast<std::size_t>(key / period);
      const long phase = key % period;
      for (std::size_t to = 0; to < m; ++to) {
        const long elapsed = phase + legs[from][to];
        RowVectorX<double> moved = alpha * powers[static_cast<std::size_t>(elapsed / period)];
        moved = moved.cwiseProduct(masks[to]) * inv_m;
        const long next_key = static_cast<long>(to) * period + elapsed % period;
        auto [it, inserted] = next.try_emplace(next_key, moved);
        if (!inserted) it->second += moved;
      }
    }
    frontier = std::move(next);
  }
  double total = 0.0;
  for (const auto& [key, alpha] : frontier) total += alpha.sum();
  return total;
}

std::vector<SecurityRow> run_security_sweep(const ScenarioConfig& base, std::span<const int> k_grid,
                                            long trials, unsigned threads) {
  if (trials < 1) throw DomainError("trials must be positive");
  ScenarioConfig cfg = base;
  cfg.kind = ScenarioKind::RemoteWithFollower;
  cfg.record_trace = false;
  cfg.fixed_checkpoints.clear();

  const auto model = cfg.walk_model();
  const auto p = build_transition_matrix<double>(model.n);
  const auto space = cfg.checkpoint_space();
  const auto states = snap_to_states(model, space.checkpoints);

  // Mean leg durations under uniform draws, for the step-count columns.
  double first_leg = 0.0;
  double later_leg = 0.0;
  for (double to : space.checkpoints) {
    first_leg += leg_time(cfg, cfg.d_ref, to);
    for (double from : space.checkpoints) later_leg += leg_time(cfg, from, to);
  }
  const double m = static_cast<double>(space.size());
  first_leg /= m;
  later_leg /= m * m;

  std::vector<SecurityRow> rows;
  for (int k : k_grid) {
    if (k < 1) throw DomainError("security sweep needs K >= 1");
    cfg.K = k;
    cfg.validate();

    std::atomic<long> interior{0};
    std::atomic<long> accepted{0};
    std::atomic<long> t0_ticks{-1};
    parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t trial) {
      ScenarioConfig c = cfg;
      c.seed = trial_seed(base.seed, k, static_cast<long>(trial));
      const auto r = run_scenario(c);
      if (r.interior_pass) interior.fetch_add(1, std::memory_order_relaxed);
      if (r.verdict == Verdict::Accept) accepted.fetch_add(1, std::memory_order_relaxed);
      long expected = -1;
      t0_ticks.compare_exchange_strong(expected, std::lround(r.t0 / cfg.acc.dt));
    });

    SecurityRow row;
    row.K = k;
    row.N = static_cast<long>(model.n);
    row.M = static_cast<long>(states.size());
    row.steps.push_back(deadline_to_steps(first_leg, cfg.walk_step_time));
    for (int i = 1; i < k; ++i) row.steps.push_back(deadline_to_steps(later_leg, cfg.walk_step_time));
    row.interior = make_estimate(trials, interior.load());
    row.accepted = make_estimate(trials, accepted.load());
    row.marginal_product = passing_probability(p, states, row.steps);
    row.exact_forward = exact_passing_probability(p, states, row.steps);
    row.exact_scheduled =
        scheduled_passing_probability(cfg, static_cast<double>(t0_ticks.load()) * cfg.acc.dt);
    row.guess_bound = guess_bound(row.M, k);
    row.steady_state = steady_state_approx(row.N, k);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace pof
