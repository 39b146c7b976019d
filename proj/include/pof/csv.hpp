#pragma once

// CSV files written by the harness. Every file has one header row; numbers
// use 9 significant digits; absent values are empty fields. Column lists are
// documented in docs/csv_schemas.md.

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pof/scenario.hpp"
#include "pof/sweep.hpp"

namespace pof {

std::string format_number(double v);

struct ManeuverRow {
  double lambda;
  double time;
  double delta;
  double distance;
  double velocity;
  double acceleration;
};

/// Closed-loop profiles of one checkpoint maneuver at constant verifier
/// speed, one series per lambda, over `horizon` seconds.
std::vector<ManeuverRow> maneuver_rows(double d_ref, double checkpoint, double velocity,
                                       const AccParams& acc, std::span<const double> lambdas,
                                       double horizon);

void write_traces(const std::filesystem::path& path, const ScenarioResult& result);
void write_challenges(const std::filesystem::path& path, const ScenarioResult& result);
void write_events(const std::filesystem::path& path, const ScenarioResult& result);
void write_sweep(const std::filesystem::path& path, const SweepResult& sweep);
void write_security(const std::filesystem::path& path, std::span<const SecurityRow> rows);
void write_maneuver(const std::filesystem::path& path, std::span<const ManeuverRow> rows);

extern const std::vector<std::string> kTraceColumns;
extern const std::vector<std::string> kChallengeColumns;
extern const std::vector<std::string> kEventColumns;
extern const std::vector<std::string> kSweepColumns;
extern const std::vector<std::string> kSecurityColumns;
extern const std::vector<std::string> kManeuverColumns;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Index of `name`; throws SchemaError naming the column when missing.
  std::size_t column(std::string_view name) const;
  /// Numeric cell; empty cells are NaN. Throws SchemaError naming the column
  /// on text that is not a number.
  double number(std::size_t row, std::string_view name) const;
  const std::string& text(std::size_t row, std::string_view name) const;
};

/// Reads a comma-separated file without quoting. Rows whose field count
/// differs from the header raise SchemaError naming the first missing or
/// extra column.
CsvTable read_csv(const std::filesystem::path& path);

}  // namespace pof
