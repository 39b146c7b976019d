#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "pof/csv.hpp"

namespace pof {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional symmetric error bars
};

struct Panel {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  std::vector<Series> series;
};

/// Stacked line charts sharing one SVG document.
std::string render_svg(std::span<const Panel> panels);

/// Chart panels for a CSV written by the harness, chosen by its header.
/// A file without any header yields one empty panel. Throws SchemaError for
/// headers that match no known schema or rows with bad values.
std::vector<Panel> panels_for(const CsvTable& table, const std::string& name);

/// Writes one SVG per input file, named after the file, into `out_dir` and
/// returns the paths written. Output depends only on the CSV contents.
std::vector<std::filesystem::path> emit_plots(std::span<const std::filesystem::path> csvs,
                                              const std::filesystem::path& out_dir);

}  // namespace pof
