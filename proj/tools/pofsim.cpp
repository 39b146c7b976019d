// Command-line front end: one scenario, parameter sweeps, the security
// table and SVG charts.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pof/csv.hpp"
#include "pof/error.hpp"
#include "pof/plot.hpp"
#include "pof/scenario.hpp"
#include "pof/sweep.hpp"

namespace fs = std::filesystem;

namespace {

template <typename E>
std::vector<std::string> names(std::initializer_list<E> values) {
  std::vector<std::string> out;
  for (E v : values) out.emplace_back(pof::to_string(v));
  return out;
}

void print_run(const pof::ScenarioResult& r) {
  std::printf("scenario   %s (seed %llu)\n", std::string(pof::to_string(r.kind)).c_str(),
              static_cast<unsigned long long>(r.seed));
  std::printf("requester  %s, join %s\n", r.requester.c_str(),
              std::string(pof::to_string(r.join_check)).c_str());
  std::printf("verdict    %s\n",
              r.verdict ? std::string(pof::to_string(*r.verdict)).c_str() : "none");
  if (r.candidate_abort != pof::AbortReason::None) {
    std::printf("candidate  aborted (%s)\n", std::string(pof::to_string(r.candidate_abort)).c_str());
  }
  if (!r.challenges.entries.empty()) {
    std::printf("time       %.1f s for K=%d, %d revision(s)\n", r.verification_time,
                r.challenges.K(), r.revisions);
  }
  for (std::size_t k = 0; k < r.outcomes.size(); ++k) {
    const auto& o = r.outcomes[k];
    std::printf("  %2zu  t=%6.1f  d=%5.1f  measured=%s  %s\n", k, o.absolute_time, o.distance,
                o.measured ? pof::format_number(*o.measured).c_str() : "-",
                o.pass ? "ok" : "FAIL");
  }
}

std::vector<fs::path> expand_inputs(const std::vector<std::string>& inputs, const fs::path& out) {
  std::vector<fs::path> files;
  std::vector<fs::path> roots;
  for (const auto& s : inputs) roots.emplace_back(s);
  if (roots.empty()) roots.push_back(out);
  for (const auto& p : roots) {
    if (!fs::is_directory(p)) {
      files.push_back(p);
      continue;
    }
    std::vector<fs::path> found;
    for (const auto& e : fs::directory_iterator(p)) {
      if (e.path().extension() == ".csv") found.push_back(e.path());
    }
    std::sort(found.begin(), found.end());
    files.insert(files.end(), found.begin(), found.end());
  }
  return files;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Proof-of-following platoon simulator"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key=value file with option values");

  pof::ScenarioConfig cfg;
  std::string out_dir = "out";
  unsigned threads = 0;

  app.add_option("--seed", cfg.seed, "Random seed")->capture_default_str();
  app.add_option("--out", out_dir, "Output directory")->capture_default_str();
  app.add_option("--threads", threads, "Worker threads, 0 = all cores")->capture_default_str();
  std::string kind = "honest";
  app.add_option("--kind", kind, "Scenario kind")
      ->check(CLI::IsMember(
          names({pof::ScenarioKind::Honest, pof::ScenarioKind::RemoteNoFollower,
                 pof::ScenarioKind::RemoteWithFollower, pof::ScenarioKind::MitmKnown,
                 pof::ScenarioKind::MitmUnknown, pof::ScenarioKind::Traffic})))
      ->capture_default_str();
  app.add_option("--v_V", cfg.v_V, "Verifier speed, m/s")->capture_default_str();
  app.add_option("--v_C", cfg.v_C, "Candidate speed, m/s")->capture_default_str();
  app.add_option("--d_ref", cfg.d_ref, "Platoon following distance, m")->capture_default_str();
  app.add_option("--g_min", cfg.g_min, "Smallest checkpoint time gap, s")->capture_default_str();
  app.add_option("--g_max", cfg.g_max, "Largest checkpoint time gap, s")->capture_default_str();
  app.add_option("--rho", cfg.rho, "Radar resolution, m")->capture_default_str();
  app.add_option("--K", cfg.K, "Number of challenges")->capture_default_str();
  app.add_option("--epsilon", cfg.epsilon, "Deadline slack, s")->capture_default_str();
  app.add_option("--lambda", cfg.acc.lambda, "Controller gain, 1/s")->capture_default_str();
  app.add_option("--tau", cfg.acc.tau, "Actuation time constant, s")->capture_default_str();
  app.add_option("--dt", cfg.acc.dt, "Update step, s")->capture_default_str();
  app.add_option("--gamma", cfg.acc.gamma, "Checkpoint tolerance, m")->capture_default_str();
  app.add_option("--sigma", cfg.sigma, "Range noise, m")->capture_default_str();
  app.add_option("--clock_skew", cfg.clock_skew, "Candidate clock offset, s")
      ->capture_default_str();
  app.add_option("--walk_step_time", cfg.walk_step_time, "Follower step period, s")
      ->capture_default_str();
  app.add_option("--checkpoints", cfg.fixed_checkpoints, "Fixed interior checkpoints, m")
      ->delimiter(',');
  std::string adjust = "none";
  app.add_option("--adjust", adjust, "Deadline adjustment policy")
      ->check(CLI::IsMember(names(
          {pof::AdjustPolicy::None, pof::AdjustPolicy::Repeat, pof::AdjustPolicy::Recompute})))
      ->capture_default_str();
  std::string deadline_policy = "acc-model";
  app.add_option("--deadline_policy", deadline_policy, "Deadline model")
      ->check(CLI::IsMember(names({pof::DeadlinePolicy::AccModel, pof::DeadlinePolicy::Simple})))
      ->capture_default_str();

  auto* run = app.add_subcommand("run", "Run one scenario");
  run->fallthrough();

  auto* sweep = app.add_subcommand("sweep", "Verification time over a parameter grid");
  sweep->fallthrough();
  std::string param_name = "K";
  std::vector<double> grid;
  int seeds = 30;
  sweep->add_option("--param", param_name, "Swept parameter")
      ->check(CLI::IsMember(names({pof::SweepParameter::K, pof::SweepParameter::M,
                                   pof::SweepParameter::Lambda, pof::SweepParameter::Gamma})))
      ->capture_default_str();
  sweep->add_option("--grid", grid, "Grid values")->delimiter(',');
  sweep->add_option("--seeds", seeds, "Seeds per grid point")->capture_default_str();

  auto* security = app.add_subcommand("security", "Random-walk follower pass rates");
  security->fallthrough();
  long trials = 2000;
  std::vector<int> ks{1, 2, 3, 4, 5};
  security->add_option("--trials", trials, "Episodes per K")->capture_default_str();
  security->add_option("--Ks", ks, "Values of K")->delimiter(',');

  auto* plot = app.add_subcommand("plot", "Render SVG charts from CSV files");
  plot->fallthrough();
  std::vector<std::string> inputs;
  plot->add_option("inputs", inputs, "CSV files or directories (default: --out)");

  CLI11_PARSE(app, argc, argv);
  cfg.kind = *pof::parse_scenario_kind(kind);
  cfg.adjust = *pof::parse_adjust_policy(adjust);
  cfg.deadline_policy = *pof::parse_deadline_policy(deadline_policy);
  const pof::SweepParameter param = *pof::parse_sweep_parameter(param_name);

  try {
    const fs::path out(out_dir);
    fs::create_directories(out);

    if (*run) {
      const auto result = pof::run_scenario(cfg);
      pof::write_traces(out / "traces.csv", result);
      pof::write_challenges(out / "challenges.csv", result);
      pof::write_events(out / "events.csv", result);
      const double lambdas[] = {0.1, cfg.acc.lambda};
      const auto rows = pof::maneuver_rows(cfg.d_ref, cfg.d_ref - 3.0, cfg.v_V, cfg.acc,
                                           lambdas, 30.0);
      pof::write_maneuver(out / "maneuver.csv", rows);
      print_run(result);
    } else if (*sweep) {
      if (grid.empty()) {
        switch (param) {
          case pof::SweepParameter::K: grid = {1, 2, 3, 4, 5, 6, 7, 8}; break;
          case pof::SweepParameter::M: grid = {11, 21, 31, 41, 51}; break;
          case pof::SweepParameter::Lambda: grid = {0.1, 0.2, 0.4, 0.8}; break;
          case pof::SweepParameter::Gamma: grid = {0.1, 0.2, 0.3, 0.5, 1.0}; break;
        }
      }
      const auto result = pof::run_sweep(cfg, param, grid, seeds, threads);
      pof::write_sweep(out / "sweep.csv", result);
      std::printf("%-8s %6s %10s %9s %9s\n", std::string(pof::to_string(param)).c_str(), "runs",
                  "mean (s)", "std (s)", "accept");
      for (const auto& r : result.rows) {
        std::printf("%-8g %6d %10.2f %9.2f %9.3f\n", r.value, r.runs, r.mean_time, r.std_time,
                    r.pass_rate);
      }
    } else if (*security) {
      const auto rows = pof::run_security_sweep(cfg, ks, trials, threads);
      pof::write_security(out / "security.csv", rows);
      std::printf("%2s %8s %10s %10s %12s %12s %12s\n", "K", "passes", "rate", "se", "marginals",
                  "exact", "(1/M)^K");
      for (const auto& r : rows) {
        std::printf("%2d %8ld %10.3g %10.3g %12.4g %12.4g %12.4g\n", r.K, r.interior.passes,
                    r.interior.rate, r.interior.std_error, r.marginal_product, r.exact_scheduled,
                    r.guess_bound);
      }
    } else if (*plot) {
      const auto files = expand_inputs(inputs, out);
      for (const auto& p : pof::emit_plots(files, out)) std::printf("%s\n", p.string().c_str());
    }
  } catch (const pof::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
