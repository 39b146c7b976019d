#include "pof/markov.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>

#include "pof/crypto.hpp"
#include "pof/parallel.hpp"

namespace pof {

double guess_bound(long m, long k) {
  if (m < 1) throw DomainError("M must be at least one");
  if (k < 0) throw DomainError("K must be non-negative");
  return std::pow(1.0 / static_cast<double>(m), static_cast<double>(k));
}

double steady_state_approx(long n, long k) {
  if (n < 2) throw DomainError("N must be at least two");
  if (k < 0) throw DomainError("K must be non-negative");
  return std::pow(1.0 / static_cast<double>(n), static_cast<double>(k));
}

long deadline_to_steps(double deadline, double step_duration) {
  if (!(deadline > 0.0) || !(step_duration > 0.0)) {
    throw DomainError("deadline and step duration must be positive");
  }
  return std::max(1L, std::lround(deadline / step_duration));
}

Eigen::Index RandomWalkModel::nearest_state(double distance) const {
  const auto i = std::llround((distance - d_min) / d_step);
  return static_cast<Eigen::Index>(std::clamp<long long>(i, 0, n - 1));
}

RandomWalkModel RandomWalkModel::from_range(double d_min, double d_max, double d_step) {
  if (!(d_step > 0.0) || !(d_max > d_min)) throw DomainError("need d_min < d_max and d_step > 0");
  const auto n = static_cast<Eigen::Index>(std::floor((d_max - d_min) / d_step + 1e-9)) + 1;
  return {n, d_min, d_step};
}

std::vector<Eigen::Index> snap_to_states(const RandomWalkModel& model,
                                         std::span<const double> distances) {
  std::vector<Eigen::Index> out;
  out.reserve(distances.size());
  for (double d : distances) out.push_back(model.nearest_state(d));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<Eigen::Index> spread_states(Eigen::Index n, Eigen::Index count) {
  if (count < 1 || count > n) throw DomainError("need 1 <= count <= N");
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(count));
  if (count == n) {
    for (Eigen::Index i = 0; i < n; ++i) out.push_back(i);
    return out;
  }
  // Place the states at the centres of `count` equal slices of [0, n).
  for (Eigen::Index j = 0; j < count; ++j) {
    const double centre = (static_cast<double>(j) + 0.5) * static_cast<double>(n) /
                          static_cast<double>(count);
    out.push_back(std::clamp<Eigen::Index>(static_cast<Eigen::Index>(centre), 0, n - 1));
  }
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

MonteCarloEstimate make_estimate(long trials, long passes) {
  MonteCarloEstimate e;
  e.trials = trials;
  e.passes = passes;
  if (trials > 0) {
    e.rate = static_cast<double>(passes) / static_cast<double>(trials);
    e.std_error = std::sqrt(e.rate * (1.0 - e.rate) / static_cast<double>(trials));
  }
  return e;
}

MonteCarloEstimate simulate_random_walk_follower(const RandomWalkModel& model,
                                                 const MatrixX<double>& p,
                                                 std::span<const Eigen::Index> checkpoints,
                                                 std::span<const long> steps, double gamma,
                                                 long trials, std::uint64_t seed,
                                                 unsigned threads) {
  if (trials < 1) throw DomainError("trials must be positive");
  if (p.rows() != model.n || p.cols() != model.n) {
    throw DomainError("transition matrix does not match the model");
  }
  detail::check_inputs(model.n, checkpoints, steps);

  // Row-wise cumulative distributions for inverse-CDF sampling.
  MatrixX<double> cdf = p;
  for (Eigen::Index i = 0; i < cdf.rows(); ++i) {
    for (Eigen::Index j = 1; j < cdf.cols(); ++j) cdf(i, j) += cdf(i, j - 1);
  }

  std::atomic<long> passes{0};
  parallel_for(static_cast<std::size_t>(trials), threads, [&](std::size_t trial) {
    std::uint64_t stream = seed ^ (0xd1b54a32d192ed03ULL * (trial + 1));
    std::mt19937_64 rng(splitmix64(stream));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_int_distribution<Eigen::Index> start(0, model.n - 1);
    std::uniform_int_distribution<std::size_t> draw(0, checkpoints.size() - 1);

    Eigen::Index state = start(rng);
    for (long s : steps) {
      const Eigen::Index target = checkpoints[draw(rng)];
      for (long i = 0; i < s; ++i) {
        const double u = unit(rng);
        const auto row = cdf.row(state);
        Eigen::Index next = 0;
        while (next + 1 < model.n && row(next) <= u) ++next;
        state = next;
      }
      if (std::abs(model.distance(state) - model.distance(target)) > gamma + 1e-9) return;
    }
    passes.fetch_add(1, std::memory_order_relaxed);
  });
  return make_estimate(trials, passes.load());
}

}  // namespace pof
