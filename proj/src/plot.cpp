#include "pof/plot.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pof/error.hpp"

namespace pof {

namespace {

constexpr double kWidth = 760.0;
constexpr double kPanelHeight = 280.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 170.0;
constexpr double kTop = 34.0;
constexpr double kBottom = 46.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) { return format_number(std::round(v * 100.0) / 100.0); }

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

// Tick positions at 1, 2 or 5 times a power of ten.
std::vector<double> nice_ticks(Range& r) {
  if (!(r.hi > r.lo)) {
    const double pad = std::abs(r.lo) > 0 ? std::abs(r.lo) * 0.1 : 1.0;
    r.lo -= pad;
    r.hi += pad;
  }
  const double raw = (r.hi - r.lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double f : {1.0, 2.0, 5.0, 10.0}) {
    step = f * mag;
    if (step >= raw) break;
  }
  r.lo = std::floor(r.lo / step) * step;
  r.hi = std::ceil(r.hi / step) * step;
  std::vector<double> ticks;
  for (double t = r.lo; t <= r.hi + step * 1e-6; t += step) ticks.push_back(std::abs(t) < step * 1e-9 ? 0.0 : t);
  return ticks;
}

double transform(double v, bool log_y) { return log_y ? std::log10(v) : v; }

bool usable(double x, double y, bool log_y) {
  return std::isfinite(x) && std::isfinite(y) && (!log_y || y > 0.0);
}

void render_panel(std::ostringstream& os, const Panel& p, double y0) {
  Range xr{1e300, -1e300};
  Range yr{1e300, -1e300};
  for (const auto& s : p.series) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i], p.log_y)) continue;
      const double e = i < s.err.size() && std::isfinite(s.err[i]) ? s.err[i] : 0.0;
      xr.lo = std::min(xr.lo, s.x[i]);
      xr.hi = std::max(xr.hi, s.x[i]);
      yr.lo = std::min(yr.lo, transform(p.log_y ? s.y[i] : s.y[i] - e, p.log_y));
      yr.hi = std::max(yr.hi, transform(s.y[i] + e, p.log_y));
    }
  }
  if (xr.lo > xr.hi) xr = {0.0, 1.0};
  if (yr.lo > yr.hi) yr = {0.0, 1.0};
  const auto xt = nice_ticks(xr);
  const auto yt = nice_ticks(yr);

  const double pw = kWidth - kLeft - kRight;
  const double ph = kPanelHeight - kTop - kBottom;
  const double ox = kLeft;
  const double oy = y0 + kTop;
  const auto px = [&](double x) { return ox + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double y) { return oy + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

  os << "<text x=\"" << num(ox + pw / 2) << "\" y=\"" << num(y0 + 20)
     << "\" text-anchor=\"middle\" font-size=\"14\">" << escape(p.title) << "</text>\n";
  os << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\"" << num(pw)
     << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"#000\"/>\n";
  for (double t : xt) {
    os << "<line x1=\"" << num(px(t)) << "\" y1=\"" << num(oy + ph) << "\" x2=\"" << num(px(t))
       << "\" y2=\"" << num(oy + ph + 5) << "\" stroke=\"#000\"/>";
    os << "<text x=\"" << num(px(t)) << "\" y=\"" << num(oy + ph + 18)
       << "\" text-anchor=\"middle\" font-size=\"11\">" << format_number(t) << "</text>\n";
  }
  for (double t : yt) {
    const std::string label = p.log_y ? "1e" + format_number(t) : format_number(t);
    os << "<line x1=\"" << num(ox - 5) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(ox)
       << "\" y2=\"" << num(py(t)) << "\" stroke=\"#000\"/>";
    os << "<line x1=\"" << num(ox) << "\" y1=\"" << num(py(t)) << "\" x2=\"" << num(ox + pw)
       << "\" y2=\"" << num(py(t)) << "\" stroke=\"#ddd\"/>";
    os << "<text x=\"" << num(ox - 8) << "\" y=\"" << num(py(t) + 4)
       << "\" text-anchor=\"end\" font-size=\"11\">" << label << "</text>\n";
  }
  os << "<text x=\"" << num(ox + pw / 2) << "\" y=\"" << num(oy + ph + 36)
     << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(p.x_label) << "</text>\n";
  os << "<text transform=\"translate(" << num(ox - 50) << "," << num(oy + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">" << escape(p.y_label)
     << "</text>\n";

  for (std::size_t si = 0; si < p.series.size(); ++si) {
    const auto& s = p.series[si];
    const char* colour = kPalette[si % std::size(kPalette)];
    std::ostringstream path;
    bool pen_down = false;
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.x[i], s.y[i], p.log_y)) {
        pen_down = false;
        continue;
      }
      path << (pen_down ? " L" : " M") << num(px(s.x[i])) << ' '
           << num(py(transform(s.y[i], p.log_y)));
      pen_down = true;
      if (i < s.err.size() && std::isfinite(s.err[i]) && s.err[i] > 0.0 && !p.log_y) {
        os << "<line x1=\"" << num(px(s.x[i])) << "\" y1=\"" << num(py(s.y[i] - s.err[i]))
           << "\" x2=\"" << num(px(s.x[i])) << "\" y2=\"" << num(py(s.y[i] + s.err[i]))
           << "\" stroke=\"" << colour << "\"/>\n";
      }
    }
    if (!path.str().empty()) {
      os << "<path d=\"" << path.str().substr(1) << "\" fill=\"none\" stroke=\"" << colour
         << "\" stroke-width=\"1.5\"/>\n";
    }
    const double ly = oy + 12 + 18 * static_cast<double>(si);
    os << "<line x1=\"" << num(ox + pw + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
       << num(ox + pw + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << colour
       << "\" stroke-width=\"2\"/>";
    os << "<text x=\"" << num(ox + pw + 38) << "\" y=\"" << num(ly + 4)
       << "\" font-size=\"11\">" << escape(s.label) << "</text>\n";
  }
}

bool has_columns(const CsvTable& t, const std::vector<std::string>& cols) {
  return t.header == cols;
}

std::vector<Panel> maneuver_panels(const CsvTable& t) {
  std::map<double, Series> acc, vel, dist;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double l = t.number(r, "lambda");
    const double x = t.number(r, "time");
    for (auto* m : {&acc, &vel, &dist}) (*m)[l].label = "lambda=" + format_number(l);
    acc[l].x.push_back(x);
    acc[l].y.push_back(t.number(r, "acceleration"));
    vel[l].x.push_back(x);
    vel[l].y.push_back(t.number(r, "velocity"));
    dist[l].x.push_back(x);
    dist[l].y.push_back(t.number(r, "distance"));
  }
  const auto collect = [](std::map<double, Series>& m) {
    std::vector<Series> out;
    for (auto& [k, s] : m) out.push_back(std::move(s));
    return out;
  };
  return {{"Candidate acceleration", "time (s)", "m/s^2", false, collect(acc)},
          {"Candidate velocity", "time (s)", "m/s", false, collect(vel)},
          {"Following distance", "time (s)", "m", false, collect(dist)}};
}

std::vector<Panel> trace_panels(const CsvTable& t) {
  // Positions per tick, grouped by vehicle; gaps are taken to the verifier.
  std::map<long, std::string> roles;
  std::map<long, Series> vel;
  std::map<long, Series> gap;
  std::map<double, double> verifier_pos;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.text(r, "role") == "verifier") verifier_pos[t.number(r, "time")] = t.number(r, "position");
  }
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto id = std::lround(t.number(r, "vehicle"));
    const auto& role = t.text(r, "role");
    const double time = t.number(r, "time");
    vel[id].label = role;
    vel[id].x.push_back(time);
    vel[id].y.push_back(t.number(r, "velocity"));
    if (role == "verifier" || role == "lead") continue;
    gap[id].label = role + " (lane " + t.text(r, "lane") + ")";
    gap[id].x.push_back(time);
    const auto it = verifier_pos.find(time);
    gap[id].y.push_back(it == verifier_pos.end() ? std::nan("")
                                                 : it->second - t.number(r, "position"));
  }
  Panel pg{"Distance behind the verifier", "time (s)", "m", false, {}};
  for (auto& [k, s] : gap) pg.series.push_back(std::move(s));
  Panel pv{"Velocity", "time (s)", "m/s", false, {}};
  for (auto& [k, s] : vel) pv.series.push_back(std::move(s));
  return {pg, pv};
}

std::vector<Panel> challenge_panels(const CsvTable& t) {
  Series target{"checkpoint", {}, {}, {}};
  Series measured{"measured", {}, {}, {}};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const double x = t.number(r, "absolute_time");
    target.x.push_back(x);
    target.y.push_back(t.number(r, "distance"));
    measured.x.push_back(x);
    measured.y.push_back(t.number(r, "measured"));
  }
  return {{"Challenges and responses", "time (s)", "m", false, {target, measured}}};
}

std::vector<Panel> sweep_panels(const CsvTable& t) {
  std::string param = t.rows.empty() ? "value" : t.text(0, "parameter");
  Series mean{"mean +/- std", {}, {}, {}};
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    mean.x.push_back(t.number(r, "value"));
    mean.y.push_back(t.number(r, "mean_time"));
    mean.err.push_back(t.number(r, "std_time"));
  }
  return {{"Verification time", param, "s", false, {mean}}};
}

std::vector<Panel> security_panels(const CsvTable& t) {
  const std::vector<std::pair<std::string, std::string>> cols{
      {"interior_rate", "simulated"},       {"marginal_product", "product of marginals"},
      {"exact_scheduled", "exact"},         {"guess_bound", "(1/M)^K"},
      {"steady_state", "(1/N)^K"}};
  Panel p{"Passing probability of a random-walk follower", "K", "probability", true, {}};
  for (const auto& [col, label] : cols) {
    Series s{label, {}, {}, {}};
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      s.x.push_back(t.number(r, "K"));
      s.y.push_back(t.number(r, col));
    }
    p.series.push_back(std::move(s));
  }
  return {p};
}

}  // namespace

std::string render_svg(std::span<const Panel> panels) {
  std::ostringstream os;
  const double height = kPanelHeight * static_cast<double>(std::max<std::size_t>(panels.size(), 1));
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\""
     << num(height) << "\" font-family=\"sans-serif\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
  for (std::size_t i = 0; i < panels.size(); ++i) {
    render_panel(os, panels[i], kPanelHeight * static_cast<double>(i));
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<Panel> panels_for(const CsvTable& table, const std::string& name) {
  if (table.header.empty()) return {{name, "", "", false, {}}};
  if (has_columns(table, kManeuverColumns)) return maneuver_panels(table);
  if (has_columns(table, kTraceColumns)) return trace_panels(table);
  if (has_columns(table, kChallengeColumns)) return challenge_panels(table);
  if (has_columns(table, kSweepColumns)) return sweep_panels(table);
  if (has_columns(table, kSecurityColumns)) return security_panels(table);
  if (has_columns(table, kEventColumns)) return {};
  throw SchemaError("unrecognized header starting with column '" + table.header.front() + "'");
}

std::vector<std::filesystem::path> emit_plots(std::span<const std::filesystem::path> csvs,
                                              const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::vector<std::filesystem::path> written;
  for (const auto& csv : csvs) {
    const auto table = read_csv(csv);
    const auto stem = csv.stem().string();
    const auto panels = panels_for(table, stem);
    if (panels.empty()) continue;
    const auto out = out_dir / (stem + ".svg");
    std::ofstream os(out, std::ios::binary);
    if (!os) throw Error("cannot write " + out.string());
    os << render_svg(panels);
    written.push_back(out);
  }
  return written;
}

}  // namespace pof
