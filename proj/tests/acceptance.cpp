// One PASS/FAIL line per acceptance criterion. Exit status is non-zero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pof/acc_controller.hpp"
#include "pof/challenge.hpp"
#include "pof/csv.hpp"
#include "pof/markov.hpp"
#include "pof/scenario.hpp"
#include "pof/sweep.hpp"

using namespace pof;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("%s %2d %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* f, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string csv_bytes(const ScenarioResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  write_traces(dir / "traces.csv", r);
  write_challenges(dir / "challenges.csv", r);
  write_events(dir / "events.csv", r);
  return slurp(dir / "traces.csv") + slurp(dir / "challenges.csv") + slurp(dir / "events.csv");
}

void checkpoint_space() {
  Stopwatch sw;
  const auto s = build_checkpoint_space(30.0, 1.0, 2.0, 0.3);
  const double ms = sw.ms();
  bool spacing = true;
  for (std::size_t i = 1; i < s.size(); ++i) {
    spacing = spacing && std::abs(s.checkpoints[i] - s.checkpoints[i - 1] - 0.6) < 1e-9;
  }
  const bool ok = s.size() == 51 && s.checkpoints.front() == 30.0 &&
                  std::abs(s.checkpoints.back() - 60.0) < 1e-9 && spacing && ms < 1.0;
  report(1, ok, fmt("checkpoint space: M=%zu, %.1f..%.1f m, spacing %.1f m, %.3f ms", s.size(),
                    s.checkpoints.front(), s.checkpoints.back(), s.spacing, ms));
}

void deadline_and_smoothness() {
  const AccParams acc;
  Stopwatch sw;
  const auto r = compute_deadline(45.0, 42.0, 30.0, 30.0, acc);
  const double ms = sw.ms();
  report(2, r.deadline >= 6.5 && r.deadline <= 8.7 && ms < 10.0,
         fmt("deadline 45->42 m: %.1f s (window 6.5..8.7), %.3f ms", r.deadline, ms));

  const std::vector<double> profile{30.0};
  const auto m = simulate_maneuver(45.0, 42.0, 30.0, profile, acc);
  double peak = 0.0;
  for (const auto& s : m.trajectory) peak = std::max(peak, std::abs(s.candidate_velocity - 30.0));
  report(3, peak <= 0.7, fmt("peak |v_C - 30| during the maneuver: %.3f m/s (limit 0.7)", peak));
}

void lambda_ordering() {
  AccParams slow;
  slow.lambda = 0.1;
  const double d01 = compute_deadline(45.0, 42.0, 30.0, 30.0, slow).deadline;
  const double d04 = compute_deadline(45.0, 42.0, 30.0, 30.0, AccParams{}).deadline;
  report(4, d01 > d04, fmt("deadline lambda=0.1: %.1f s > lambda=0.4: %.1f s", d01, d04));
}

void gamma_monotone() {
  std::string values;
  bool ok = true;
  double previous = 1e300;
  for (double g : {0.1, 0.2, 0.3, 0.5, 1.0}) {
    AccParams p;
    p.gamma = g;
    const double d = compute_deadline(45.0, 42.0, 30.0, 30.0, p).deadline;
    ok = ok && d <= previous;
    previous = d;
    values += fmt("%s%.1f", values.empty() ? "" : " ", d);
  }
  report(5, ok, "deadlines over gamma 0.1,0.2,0.3,0.5,1.0: " + values + " s (non-increasing)");
}

void completeness() {
  Stopwatch sw;
  int accepted = 0;
  double worst = 0.0;
  double total = 0.0;
  const int seeds = 100;
  for (int s = 1; s <= seeds; ++s) {
    ScenarioConfig c;
    c.seed = static_cast<std::uint64_t>(s);
    c.record_trace = false;
    const auto r = run_scenario(c);
    accepted += r.verdict && *r.verdict == Verdict::Accept;
    worst = std::max(worst, r.verification_time);
    total += r.verification_time;
  }

  ScenarioConfig base;
  base.record_trace = false;
  std::vector<double> grid;
  for (int k = 1; k <= 8; ++k) grid.push_back(k);
  const auto sweep = run_sweep(base, SweepParameter::K, grid, 30);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::string means;
  for (const auto& row : sweep.rows) {
    sx += row.value;
    sy += row.mean_time;
    sxx += row.value * row.value;
    sxy += row.value * row.mean_time;
    means += fmt("%s%.1f", means.empty() ? "" : " ", row.mean_time);
  }
  const double n = static_cast<double>(sweep.rows.size());
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double seconds = sw.ms() / 1000.0;

  const bool ok = accepted == seeds && worst < 60.0 && slope >= 7.0 && slope <= 13.0 &&
                  seconds < 60.0;
  report(6, ok,
         fmt("completeness K=5: %d/%d ACCEPT, mean %.1f s, max %.1f s (limit 60); "
             "slope over K=1..8 %.2f s/challenge (7..13); means %s; wall %.1f s",
             accepted, seeds, total / seeds, worst, slope, means.c_str(), seconds));
}

void traffic() {
  ScenarioConfig c;
  c.kind = ScenarioKind::Traffic;
  c.fixed_checkpoints = {42.0};
  const auto plain = run_scenario(c);
  c.adjust = AdjustPolicy::Recompute;
  const auto adjusted = run_scenario(c);
  const auto completion = plain.outcomes.size() > 1 ? plain.outcomes[1].completion : std::nullopt;
  const bool ok = completion && *completion >= 11.5 && *completion <= 15.7 && plain.verdict &&
                  *plain.verdict == Verdict::Reject && adjusted.verdict &&
                  *adjusted.verdict == Verdict::Accept;
  report(7, ok,
         fmt("traffic: completion %.1f s (11.5..15.7), unadjusted %s, recompute %s",
             completion ? *completion : -1.0,
             plain.verdict ? std::string(to_string(*plain.verdict)).c_str() : "none",
             adjusted.verdict ? std::string(to_string(*adjusted.verdict)).c_str() : "none"));
}

void markov_exactness() {
  const auto p = build_transition_matrix(3);
  MatrixX<double> hand(3, 3);
  hand << 1.0 / 2, 1.0 / 2, 0.0, 1.0 / 3, 1.0 / 3, 1.0 / 3, 0.0, 1.0 / 2, 1.0 / 2;

  // Enumerate (start, checkpoint, next state) triples.
  const std::vector<Eigen::Index> cps{0, 1};
  double oracle = 0.0;
  for (int s = 0; s < 3; ++s) {
    for (auto c : cps) oracle += (1.0 / 3.0) * 0.5 * hand(s, c);
  }
  const std::vector<long> steps{1};
  const double value = passing_probability(p, cps, steps);
  const bool ok = p == hand && std::abs(value - 13.0 / 36.0) < 1e-12 &&
                  std::abs(value - oracle) < 1e-12;
  report(8, ok, fmt("transition matrix N=3 exact; passing probability %.15f vs 13/36", value));
}

void guess_bound_check() {
  bool ok = true;
  double worst_margin = -1.0;
  int cases = 0;
  for (Eigen::Index n : {3, 10, 100}) {
    const auto p = build_transition_matrix(n);
    const RandomWalkModel model{n, 30.0, 0.6};
    for (Eigen::Index m : {2, 5, 51}) {
      if (m > n) continue;
      const auto cps = spread_states(n, m);
      for (long k = 1; k <= 5; ++k) {
        const std::vector<long> steps(static_cast<std::size_t>(k), 8);
        const double bound = guess_bound(m, k);
        const double marginal_product = passing_probability(p, cps, steps);
        const auto mc = simulate_random_walk_follower(model, p, cps, steps, 0.3, 2000,
                                                      static_cast<std::uint64_t>(n * 100 + m * 10 + k));
        const double se = std::sqrt(bound * (1.0 - bound) / 2000.0);
        ok = ok && marginal_product <= bound + 1e-12 && mc.rate <= bound + 3.0 * se;
        worst_margin = std::max(worst_margin, mc.rate - bound - 3.0 * se);
        ++cases;
      }
    }
  }
  report(9, ok, fmt("(1/M)^K bound over %d grid cases, 2000 trials each; largest MC excess over "
                    "bound+3SE %.2e",
                    cases, worst_margin));
}

void steady_state() {
  const Eigen::Index n = 100;
  const auto p = build_transition_matrix(n);
  bool ok = true;
  std::string values;
  for (auto cps : {spread_states(n, 51), spread_states(n, 100)}) {
    for (long s : {5000L, 50000L}) {
      const std::vector<long> steps{s};
      const double v = passing_probability(p, cps, steps);
      ok = ok && std::abs(v - 0.01) <= 0.001;
      values += fmt("%s%.5f", values.empty() ? "" : " ", v);
    }
  }
  report(10, ok, "steady state N=100 K=1: " + values + " vs 1/N = 0.01 (10%)");
}

void security() {
  ScenarioConfig base;
  base.kind = ScenarioKind::RemoteWithFollower;
  const std::vector<int> ks{1, 2, 3, 4, 5};
  const auto rows = run_security_sweep(base, ks, 2000);
  bool ok = true;
  std::string detail;
  for (const auto& r : rows) {
    if (r.K >= 3) ok = ok && r.accepted.passes == 0;
    detail += fmt("%sK=%d:%ld", detail.empty() ? "" : " ", r.K, r.accepted.passes);
  }
  const auto& one = rows.front();
  const double se = std::sqrt(one.exact_scheduled * (1.0 - one.exact_scheduled) / 2000.0);
  const bool k1 = std::abs(one.interior.rate - one.exact_scheduled) <= 3.0 * se;
  report(11, ok && k1,
         fmt("random-walk follower, 2000 episodes; accepts %s; K=1 rate %.4f vs exact %.4f "
             "(3 SE = %.4f)",
             detail.c_str(), one.interior.rate, one.exact_scheduled, 3.0 * se));
}

void mitm() {
  ScenarioConfig known;
  known.kind = ScenarioKind::MitmKnown;
  ScenarioConfig unknown;
  unknown.kind = ScenarioKind::MitmUnknown;
  const auto a = run_scenario(known);
  const auto b = run_scenario(unknown);
  const auto a2 = run_scenario(known);
  const auto b2 = run_scenario(unknown);
  const bool known_ok = a.candidate_abort == AbortReason::UnexpectedSigner && a.verdict &&
                        *a.verdict == Verdict::Reject;
  const bool unknown_ok = b.requester.rfind("adversary", 0) == 0 && b.verdict && *b.verdict == Verdict::Accept;
  const bool stable = a.events.size() == a2.events.size() && b.events.size() == b2.events.size() &&
                      a2.verdict == a.verdict && b2.verdict == b.verdict &&
                      a2.candidate_abort == a.candidate_abort;
  report(12, known_ok && unknown_ok && stable,
         fmt("relay attack: known verifier -> candidate abort %s, adversary %s; unknown verifier "
             "-> adversary %s",
             std::string(to_string(a.candidate_abort)).c_str(),
             a.verdict ? std::string(to_string(*a.verdict)).c_str() : "none",
             b.verdict ? std::string(to_string(*b.verdict)).c_str() : "none"));
}

void determinism() {
  const fs::path root = fs::temp_directory_path() / "pof_acceptance_determinism";
  fs::remove_all(root);
  bool ok = true;
  int runs = 0;
  for (auto kind : {ScenarioKind::Honest, ScenarioKind::RemoteNoFollower,
                    ScenarioKind::RemoteWithFollower, ScenarioKind::MitmKnown,
                    ScenarioKind::MitmUnknown, ScenarioKind::Traffic}) {
    for (std::uint64_t seed : {1u, 99u}) {
      ScenarioConfig c;
      c.kind = kind;
      c.seed = seed;
      c.sigma = 0.2;
      ok = ok && csv_bytes(run_scenario(c), root / "a") == csv_bytes(run_scenario(c), root / "b");
      ++runs;
    }
  }
  fs::remove_all(root);
  report(13, ok, fmt("byte-identical CSVs for %d repeated scenario runs", runs));
}

}  // namespace

int main() {
  checkpoint_space();
  deadline_and_smoothness();
  lambda_ordering();
  gamma_monotone();
  completeness();
  traffic();
  markov_exactness();
  guess_bound_check();
  steady_state();
  security();
  mitm();
  determinism();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
