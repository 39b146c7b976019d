#pragma once

// Random-walk follower chain and the passing probabilities of an adversary
// who relies on an unrelated vehicle's motion to answer challenges.
//
// States are 0-based. Distributions are row vectors and P acts from the
// right: p_{n+1} = p_n * P.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "pof/error.hpp"

namespace pof {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Largest chain for which the exact computations are attempted.
inline constexpr Eigen::Index kMaxExactStates = 4096;

/// Lazy follower: forward, backward and stay are equally likely, with the
/// probability of leaving the range folded into staying at the edge.
template <typename Scalar = double>
MatrixX<Scalar> build_transition_matrix(Eigen::Index n) {
  if (n < 2) throw DomainError("a random-walk chain needs at least two states");
  MatrixX<Scalar> p = MatrixX<Scalar>::Zero(n, n);
  const Scalar half = Scalar(1) / Scalar(2);
  const Scalar third = Scalar(1) / Scalar(3);
  p(0, 0) = p(0, 1) = half;
  p(n - 1, n - 1) = p(n - 1, n - 2) = half;
  for (Eigen::Index i = 1; i + 1 < n; ++i) p(i, i - 1) = p(i, i) = p(i, i + 1) = third;
  return p;
}

/// P^n by repeated squaring; P^0 is the identity.
template <typename Derived>
MatrixX<typename Derived::Scalar> n_step_matrix(const Eigen::MatrixBase<Derived>& p, long n) {
  using Scalar = typename Derived::Scalar;
  if (p.rows() != p.cols()) throw DomainError("transition matrix must be square");
  if (n < 0) throw DomainError("step count must be non-negative");
  MatrixX<Scalar> result = MatrixX<Scalar>::Identity(p.rows(), p.cols());
  MatrixX<Scalar> base = p;
  while (n > 0) {
    if (n & 1) result = result * base;
    n >>= 1;
    if (n > 0) base = base * base;
  }
  return result;
}

namespace detail {

inline void check_inputs(Eigen::Index n, std::span<const Eigen::Index> checkpoints,
                         std::span<const long> steps) {
  if (checkpoints.empty()) throw DomainError("checkpoint set is empty");
  for (auto c : checkpoints) {
    if (c < 0 || c >= n) throw DomainError("checkpoint state out of range");
  }
  for (auto s : steps) {
    if (s < 1) throw DomainError("step counts must be at least one");
  }
}

}  // namespace detail

/// Product over challenges of the per-challenge marginal hit probability,
/// each taken from the uniform start after the cumulative step count
/// n_1 + ... + n_k. The challenges are treated as independent events.
///
/// `steps[k]` is the number of walk steps between challenge k-1 and k.
template <typename Derived>
typename Derived::Scalar passing_probability(const Eigen::MatrixBase<Derived>& p,
                                             std::span<const Eigen::Index> checkpoints,
                                             std::span<const long> steps) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = p.rows();
  detail::check_inputs(n, checkpoints, steps);
  const auto m = static_cast<Scalar>(checkpoints.size());

  Scalar result(1);
  MatrixX<Scalar> cumulative = MatrixX<Scalar>::Identity(n, n);
  for (long s : steps) {
    cumulative = cumulative * n_step_matrix(p, s);
    const RowVectorX<Scalar> column_sums = cumulative.colwise().sum();
    Scalar hit(0);
    for (auto c : checkpoints) hit += column_sums(c);
    result *= hit / (static_cast<Scalar>(n) * m);
  }
  return result;
}

/// Joint probability that a walk started uniformly sits on the drawn
/// checkpoint at every challenge, averaged over independent uniform draws
/// from `checkpoints`. Mass off the checkpoint set is discarded after each
/// challenge, so later challenges are conditioned on earlier ones.
template <typename Derived>
typename Derived::Scalar exact_passing_probability(const Eigen::MatrixBase<Derived>& p,
                                                   std::span<const Eigen::Index> checkpoints,
                                                   std::span<const long> steps) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = p.rows();
  if (n > kMaxExactStates) throw DomainError("state space too large for the exact computation");
  detail::check_inputs(n, checkpoints, steps);
  const Scalar inv_m = Scalar(1) / static_cast<Scalar>(checkpoints.size());

  RowVectorX<Scalar> alpha = RowVectorX<Scalar>::Constant(n, Scalar(1) / static_cast<Scalar>(n));
  for (long s : steps) {
    const RowVectorX<Scalar> moved = alpha * n_step_matrix(p, s);
    alpha.setZero();
    for (auto c : checkpoints) alpha(c) += moved(c) * inv_m;
  }
  return alpha.sum();
}

/// (1/M)^K.
double guess_bound(long m, long k);

/// (1/N)^K.
double steady_state_approx(long n, long k);

/// round(deadline / step_duration), at least 1.
long deadline_to_steps(double deadline, double step_duration);

/// Follower distances on an evenly spaced grid.
struct RandomWalkModel {
  Eigen::Index n = 2;
  double d_min = 0.0;
  double d_step = 1.0;

  double d_max() const { return d_min + static_cast<double>(n - 1) * d_step; }
  double distance(Eigen::Index state) const { return d_min + static_cast<double>(state) * d_step; }
  Eigen::Index nearest_state(double distance) const;

  /// Grid from d_min to d_max (inclusive when the span is a multiple of
  /// d_step).
  static RandomWalkModel from_range(double d_min, double d_max, double d_step);
};

/// Maps distances to the nearest walk states.
std::vector<Eigen::Index> snap_to_states(const RandomWalkModel& model,
                                         std::span<const double> distances);

/// `count` distinct states at the centres of equal slices of the chain.
std::vector<Eigen::Index> spread_states(Eigen::Index n, Eigen::Index count);

struct MonteCarloEstimate {
  long trials = 0;
  long passes = 0;
  double rate = 0.0;
  double std_error = 0.0;  // binomial, sqrt(rate (1 - rate) / trials)
};

MonteCarloEstimate make_estimate(long trials, long passes);

/// Episodes of the walk against freshly drawn checkpoints. A challenge is
/// answered when the follower's distance is within `gamma` of the drawn
/// checkpoint's distance. Trial i uses its own random stream derived from
/// (seed, i), so results do not depend on `threads`.
MonteCarloEstimate simulate_random_walk_follower(const RandomWalkModel& model,
                                                 const MatrixX<double>& p,
                                                 std::span<const Eigen::Index> checkpoints,
                                                 std::span<const long> steps, double gamma,
                                                 long trials, std::uint64_t seed,
                                                 unsigned threads = 0);

}  // namespace pof
