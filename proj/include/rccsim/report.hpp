#pragma once

// Pure projections of finished runs into tables and SVG charts. Nothing here
// feeds back into a simulation.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rccsim/adaptive.hpp"
#include "rccsim/config.hpp"
#include "rccsim/scenario.hpp"

namespace rccsim {

// ---- tables ----

struct Cell {
  nlohmann::json value;
  int precision = 6;  // digits after the point for floating values in CSV

  Cell(double v, int p = 6) : value(v), precision(p) {}
  Cell(int v) : value(v) {}
  Cell(long long v) : value(v) {}
  Cell(std::size_t v) : value(v) {}
  Cell(bool v) : value(v) {}
  Cell(std::string v) : value(std::move(v)) {}
  Cell(const char* v) : value(v) {}
  Cell(std::string_view v) : value(std::string(v)) {}
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

inline std::string fixed(double v, int precision) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s(buf);
  if (s.find_first_not_of("-0.") == std::string::npos && s[0] == '-') s.erase(0, 1);
  return s;
}

/// RFC 4180 quoting: fields with a comma, quote or line break are quoted.
inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string cell_text(const Cell& c) {
  const auto& v = c.value;
  if (v.is_number_float()) return fixed(v.get<double>(), c.precision);
  if (v.is_number()) return v.dump();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  return "";
}

inline std::string to_csv(const Table& t) {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out += ',';
      out += csv_field(fields[i]);
    }
    out += "\r\n";
  };
  line(t.header);
  for (const auto& row : t.rows) {
    std::vector<std::string> fields;
    for (const auto& c : row) fields.push_back(cell_text(c));
    line(fields);
  }
  return out;
}

inline nlohmann::json to_json(const Table& t) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json obj = nlohmann::json::object();
    for (std::size_t i = 0; i < row.size() && i < t.header.size(); ++i) {
      const auto& v = row[i].value;
      // Non-finite numbers have no JSON spelling; keep the CSV text.
      if (v.is_number_float() && !std::isfinite(v.get<double>())) {
        obj[t.header[i]] = cell_text(row[i]);
      } else {
        obj[t.header[i]] = v;
      }
    }
    rows.push_back(std::move(obj));
  }
  return rows;
}

inline std::string render(const Table& t, OutputFormat format) {
  return format == OutputFormat::kCsv ? to_csv(t) : to_json(t).dump(2) + "\n";
}

/// Writes `<stem>.csv` or `<stem>.json` under `dir`; returns the path.
inline std::filesystem::path write_table(const std::filesystem::path& dir, const std::string& stem,
                                         const Table& t, OutputFormat format) {
  const auto path = dir / (stem + (format == OutputFormat::kCsv ? ".csv" : ".json"));
  std::ofstream out(path, std::ios::binary);
  out << render(t, format);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return path;
}

// ---- scenario table ----

inline Table scenario_table(std::span<const ScenarioResult> results,
                            std::span<const ScenarioResult> ranked, Objective kind,
                            const ProcessConfig& config) {
  Table t;
  t.header = {"id",        "n_large",  "n_small",   "makespan_min", "util_large",
              "util_small", "freshness_violations", "interarrival_violations",
              "accepted",  "rank",     "objective", "cost",         "diagnostic"};
  for (const auto& r : results) {
    int rank_pos = 0;
    for (std::size_t i = 0; i < ranked.size(); ++i) {
      if (ranked[i].scenario.id == r.scenario.id) rank_pos = static_cast<int>(i) + 1;
    }
    const bool ran = r.diagnostic.empty();
    t.rows.push_back({r.scenario.id, r.scenario.n_large, r.scenario.n_small,
                      Cell(ran ? r.makespan : std::nan(""), 3),
                      Cell(ran ? r.mean_utilization[0] : std::nan(""), 6),
                      Cell(ran ? r.mean_utilization[1] : std::nan(""), 6),
                      r.count(ViolationKind::kFreshness), r.count(ViolationKind::kInterarrival),
                      r.accepted, rank_pos,
                      Cell(ran ? objective(r, kind, config) : std::nan(""), 6), Cell(r.cost, 2),
                      r.diagnostic});
  }
  return t;
}

// ---- utilization time series ----

struct UtilizationWindow {
  SimTime start = 0.0;
  SimTime end = 0.0;
  double utilization = 0.0;  // class mean of busy / active within the window
  double mean_active = 0.0;  // time-averaged active trucks in the window
};

/// Tumbling-window utilization per class, rebuilt from the activity log.
inline std::vector<UtilizationWindow> utilization_series(const RunResult& run, TruckSize size,
                                                         double window) {
  std::vector<UtilizationWindow> out;
  if (!(window > 0.0) || !(run.makespan > 0.0)) return out;
  const auto n = static_cast<std::size_t>(std::ceil(run.makespan / window - 1e-12));
  std::vector<std::vector<double>> busy, active;
  std::vector<int> slot(run.trucks.size(), -1);
  for (std::size_t i = 0; i < run.trucks.size(); ++i) {
    if (run.trucks[i].size != size) continue;
    slot[i] = static_cast<int>(busy.size());
    busy.emplace_back(n, 0.0);
    active.emplace_back(n, 0.0);
  }
  if (busy.empty()) return out;
  for (std::size_t k = 0; k < n; ++k) {
    out.push_back({k * window, std::min((k + 1) * window, run.makespan), 0.0, 0.0});
  }

  auto accumulate = [&](int s, TruckState state, SimTime a, SimTime b) {
    if (b <= a) return;
    auto k = static_cast<std::size_t>(a / window);
    for (; k < n && out[k].start < b; ++k) {
      const double span = std::min(b, out[k].end) - std::max(a, out[k].start);
      if (span <= 0.0) continue;
      if (state != TruckState::kIdleReleased) active[s][k] += span;
      if (is_busy(state)) busy[s][k] += span;
    }
  };
  std::vector<TruckState> state(run.trucks.size(), TruckState::kAtPlantQueue);
  std::vector<SimTime> since(run.trucks.size(), 0.0);
  for (const auto& rec : run.activity) {
    if (rec.is_paver()) continue;
    const auto i = static_cast<std::size_t>(rec.actor);
    if (slot[i] < 0) continue;
    accumulate(slot[i], state[i], since[i], rec.time);
    state[i] = static_cast<TruckState>(rec.to);
    since[i] = rec.time;
  }
  for (std::size_t i = 0; i < run.trucks.size(); ++i) {
    if (slot[i] >= 0) accumulate(slot[i], state[i], since[i], run.makespan);
  }
  for (std::size_t k = 0; k < n; ++k) {
    double sum = 0.0, act = 0.0;
    int counted = 0;
    for (std::size_t s = 0; s < busy.size(); ++s) {
      act += active[s][k];
      if (active[s][k] > 0.0) {
        sum += busy[s][k] / active[s][k];
        ++counted;
      }
    }
    out[k].utilization = counted ? sum / counted : 0.0;
    out[k].mean_active = act / (out[k].end - out[k].start);
  }
  return out;
}

/// Window-length weighted mean of a series.
inline double time_weighted_mean(const std::vector<UtilizationWindow>& series) {
  double num = 0.0, den = 0.0;
  for (const auto& w : series) {
    num += w.utilization * (w.end - w.start);
    den += w.end - w.start;
  }
  return den > 0.0 ? num / den : 0.0;
}

inline Table utilization_table(const std::vector<UtilizationWindow>& series) {
  Table t;
  t.header = {"window_start_min", "window_end_min", "utilization", "mean_active_trucks"};
  for (const auto& w : series) {
    t.rows.push_back({Cell(w.start, 3), Cell(w.end, 3), Cell(w.utilization, 6),
                      Cell(w.mean_active, 6)});
  }
  return t;
}

inline Table fleet_schedule_table(const std::vector<FleetStep>& schedule) {
  Table t;
  t.header = {"time_min", "active_large", "active_small"};
  for (const auto& s : schedule) {
    t.rows.push_back({Cell(s.time, 3), s.active[0], s.active[1]});
  }
  return t;
}

inline Table violations_table(const std::vector<Violation>& violations) {
  Table t;
  t.header = {"kind", "time_min", "truck_id", "magnitude_min"};
  for (const auto& v : violations) {
    t.rows.push_back({to_string(v.kind), Cell(v.time, 3), v.truck_id, Cell(v.magnitude, 6)});
  }
  return t;
}

// ---- charts ----

struct ChartSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
  bool step = false;  // hold each value until the next x
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<ChartSeries> series;
  std::optional<std::pair<double, double>> y_range;
};

inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

/// Line chart as a standalone SVG document. No series or no points gives
/// the frame, axes and labels only.
inline std::string render_svg(const ChartSpec& chart) {
  constexpr double W = 800, H = 420, L = 70, R = 150, T = 40, B = 50;
  const double pw = W - L - R, ph = H - T - B;
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : chart.series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = 0.0, x1 = 1.0, y0 = 0.0, y1 = 1.0;
  if (chart.y_range) std::tie(y0, y1) = *chart.y_range;
  if (y0 > 0.0) y0 = 0.0;
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * pw; };
  auto sy = [&](double y) { return T + ph - (y - y0) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << xml_escape(chart.title) << "</text>\n";
  // Axes, ticks and grid.
  o << "<g stroke=\"black\" fill=\"none\">\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T + ph << "\" x2=\"" << L + pw << "\" y2=\"" << T + ph
    << "\"/>\n";
  o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << T + ph << "\"/>\n";
  o << "</g>\n";
  constexpr int kTicks = 5;
  for (int i = 0; i <= kTicks; ++i) {
    const double xv = x0 + (x1 - x0) * i / kTicks;
    const double yv = y0 + (y1 - y0) * i / kTicks;
    o << "<line x1=\"" << fixed(sx(xv), 2) << "\" y1=\"" << T + ph << "\" x2=\"" << fixed(sx(xv), 2)
      << "\" y2=\"" << T + ph + 5 << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << fixed(sx(xv), 2) << "\" y=\"" << T + ph + 18
      << "\" text-anchor=\"middle\">" << fixed(xv, 0) << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << fixed(sy(yv), 2) << "\" x2=\"" << L + pw << "\" y2=\""
      << fixed(sy(yv), 2) << "\" stroke=\"#dddddd\"/>\n";
    o << "<text x=\"" << L - 6 << "\" y=\"" << fixed(sy(yv) + 4, 2) << "\" text-anchor=\"end\">"
      << fixed(yv, 2) << "</text>\n";
  }
  o << "<text x=\"" << L + pw / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
    << xml_escape(chart.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << T + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << xml_escape(chart.y_label) << "</text>\n";

  static constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e"};
  for (std::size_t i = 0; i < chart.series.size(); ++i) {
    const auto& s = chart.series[i];
    const char* color = kColors[i % 4];
    if (!s.points.empty()) {
      o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t k = 0; k < s.points.size(); ++k) {
        const auto [x, y] = s.points[k];
        if (s.step && k > 0) o << fixed(sx(x), 2) << ',' << fixed(sy(s.points[k - 1].second), 2) << ' ';
        o << fixed(sx(x), 2) << ',' << fixed(sy(y), 2) << ' ';
      }
      o << "\"/>\n";
    }
    const double ly = T + 10 + 18.0 * static_cast<double>(i);
    o << "<line x1=\"" << L + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << L + pw + 32
      << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << L + pw + 38 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

inline ChartSeries utilization_chart_series(const std::string& name,
                                            const std::vector<UtilizationWindow>& series) {
  ChartSeries s{name, {}, true};
  for (const auto& w : series) s.points.emplace_back(w.start, w.utilization);
  if (!series.empty()) s.points.emplace_back(series.back().end, series.back().utilization);
  return s;
}

inline std::vector<ChartSeries> fleet_chart_series(const std::vector<FleetStep>& schedule,
                                                   SimTime horizon) {
  std::vector<ChartSeries> out;
  for (TruckSize size : kTruckSizes) {
    ChartSeries s{std::string(to_string(size)) + " trucks", {}, true};
    for (const auto& step : schedule) s.points.emplace_back(step.time, step.active[index_of(size)]);
    if (!schedule.empty()) s.points.emplace_back(horizon, schedule.back().active[index_of(size)]);
    out.push_back(std::move(s));
  }
  return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace rccsim
