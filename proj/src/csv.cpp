#include "pof/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pof/error.hpp"

namespace pof {

const std::vector<std::string> kTraceColumns{"time",     "vehicle",  "role",        "lane",
                                             "position", "velocity", "acceleration"};
const std::vector<std::string> kChallengeColumns{
    "index", "distance", "deadline", "absolute_time", "measured",
    "deviation", "pass", "reissued", "completion"};
const std::vector<std::string> kEventColumns{"time", "actor", "event", "detail"};
const std::vector<std::string> kSweepColumns{"parameter", "value",    "runs",     "mean_time",
                                             "std_time",  "min_time", "max_time", "pass_rate"};
const std::vector<std::string> kSecurityColumns{
    "K",          "N",           "M",           "steps",         "trials",
    "interior_passes", "interior_rate", "interior_se", "accepts", "accept_rate",
    "marginal_product",        "exact_forward", "exact_scheduled", "guess_bound", "steady_state"};
const std::vector<std::string> kManeuverColumns{"lambda",   "time",     "delta",
                                                "distance", "velocity", "acceleration"};

namespace {

class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header)
      : out_(path, std::ios::binary) {
    if (!out_) throw Error("cannot open " + path.string() + " for writing");
    for (const auto& h : header) field(h);
    end_row();
  }

  CsvWriter& field(std::string_view s) {
    if (!first_) out_ << ',';
    first_ = false;
    for (char c : s) out_ << (c == ',' || c == '\n' ? ';' : c);
    return *this;
  }
  CsvWriter& num(double v) { return field(format_number(v)); }
  CsvWriter& num(long long v) { return field(std::to_string(v)); }
  CsvWriter& opt(const std::optional<double>& v) { return field(v ? format_number(*v) : ""); }
  void end_row() {
    out_ << '\n';
    first_ = true;
  }

 private:
  std::ofstream out_;
  bool first_ = true;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string format_number(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

std::vector<ManeuverRow> maneuver_rows(double d_ref, double checkpoint, double velocity,
                                       const AccParams& acc, std::span<const double> lambdas,
                                       double horizon) {
  std::vector<ManeuverRow> rows;
  for (double lambda : lambdas) {
    AccParams p = acc;
    p.lambda = lambda;
    p.max_iters = std::max(1, static_cast<int>(std::lround(horizon / p.dt)));
    const double profile[] = {velocity};
    const auto m = simulate_maneuver(d_ref, checkpoint, velocity, profile, p);
    rows.push_back({lambda, 0.0, checkpoint - d_ref, d_ref, velocity, 0.0});
    for (std::size_t n = 0; n < m.trajectory.size(); ++n) {
      const auto& s = m.trajectory[n];
      rows.push_back({lambda, p.dt * static_cast<double>(n + 1), s.delta, checkpoint - s.delta,
                      s.candidate_velocity, s.acceleration});
    }
  }
  return rows;
}

void write_traces(const std::filesystem::path& path, const ScenarioResult& result) {
  CsvWriter w(path, kTraceColumns);
  for (const auto& s : result.trace) {
    w.num(s.time)
        .num(static_cast<long long>(s.vehicle))
        .field(result.vehicles.at(static_cast<std::size_t>(s.vehicle)))
        .num(static_cast<long long>(s.lane))
        .num(s.position)
        .num(s.velocity)
        .num(s.acceleration);
    w.end_row();
  }
}

void write_challenges(const std::filesystem::path& path, const ScenarioResult& result) {
  CsvWriter w(path, kChallengeColumns);
  for (std::size_t k = 0; k < result.outcomes.size(); ++k) {
    const auto& o = result.outcomes[k];
    std::optional<double> deviation;
    if (o.measured) deviation = *o.measured - o.distance;
    w.num(static_cast<long long>(k))
        .num(o.distance)
        .num(o.deadline)
        .num(o.absolute_time)
        .opt(o.measured)
        .opt(deviation)
        .num(static_cast<long long>(o.pass))
        .num(static_cast<long long>(o.reissued))
        .opt(o.completion);
    w.end_row();
  }
}

void write_events(const std::filesystem::path& path, const ScenarioResult& result) {
  CsvWriter w(path, kEventColumns);
  for (const auto& e : result.events) {
    w.num(e.time).field(e.actor).field(e.event).field(e.detail);
    w.end_row();
  }
}

void write_sweep(const std::filesystem::path& path, const SweepResult& sweep) {
  CsvWriter w(path, kSweepColumns);
  for (const auto& r : sweep.rows) {
    w.field(to_string(sweep.parameter))
        .num(r.value)
        .num(static_cast<long long>(r.runs))
        .num(r.mean_time)
        .num(r.std_time)
        .num(r.min_time)
        .num(r.max_time)
        .num(r.pass_rate);
    w.end_row();
  }
}

void write_security(const std::filesystem::path& path, std::span<const SecurityRow> rows) {
  CsvWriter w(path, kSecurityColumns);
  for (const auto& r : rows) {
    std::string steps;
    for (std::size_t i = 0; i < r.steps.size(); ++i) {
      if (i) steps += ';';
      steps += std::to_string(r.steps[i]);
    }
    w.num(static_cast<long long>(r.K))
        .num(static_cast<long long>(r.N))
        .num(static_cast<long long>(r.M))
        .field(steps)
        .num(static_cast<long long>(r.interior.trials))
        .num(static_cast<long long>(r.interior.passes))
        .num(r.interior.rate)
        .num(r.interior.std_error)
        .num(static_cast<long long>(r.accepted.passes))
        .num(r.accepted.rate)
        .num(r.marginal_product)
        .num(r.exact_forward)
        .num(r.exact_scheduled)
        .num(r.guess_bound)
        .num(r.steady_state);
    w.end_row();
  }
}

void write_maneuver(const std::filesystem::path& path, std::span<const ManeuverRow> rows) {
  CsvWriter w(path, kManeuverColumns);
  for (const auto& r : rows) {
    w.num(r.lambda).num(r.time).num(r.delta).num(r.distance).num(r.velocity).num(r.acceleration);
    w.end_row();
  }
}

std::size_t CsvTable::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return i;
  }
  throw SchemaError("missing column '" + std::string(name) + "'");
}

const std::string& CsvTable::text(std::size_t row, std::string_view name) const {
  return rows.at(row).at(column(name));
}

double CsvTable::number(std::size_t row, std::string_view name) const {
  const auto& cell = text(row, name);
  if (cell.empty()) return std::nan("");
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  throw SchemaError("column '" + std::string(name) + "' row " + std::to_string(row + 1) +
                    ": not a number: '" + cell + "'");
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) return table;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  table.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() < table.header.size()) {
      throw SchemaError("row " + std::to_string(table.rows.size() + 1) + " lacks column '" +
                        table.header[cells.size()] + "'");
    }
    if (cells.size() > table.header.size()) {
      throw SchemaError("row " + std::to_string(table.rows.size() + 1) +
                        " has a value past the last column '" + table.header.back() + "'");
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

}  // namespace pof
