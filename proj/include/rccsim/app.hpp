#pragma once

// Command-line front end: simulate, sweep and adapt. Kept in a header so the
// test suite can drive it in-process.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rccsim/adaptive.hpp"
#include "rccsim/config.hpp"
#include "rccsim/report.hpp"
#include "rccsim/scenario.hpp"

namespace rccsim {

namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kConfig = 2;
inline constexpr int kInfeasible = 3;
inline constexpr int kStarved = 4;
inline constexpr int kRuntime = 5;
}  // namespace exit_code

inline constexpr const char* kToolVersion = "1.0.0";

struct CliOptions {
  std::string command;
  std::filesystem::path config_path;
  std::optional<std::pair<int, int>> scenario;
  std::filesystem::path out_dir = "out";
  std::optional<OutputFormat> format;
  std::optional<bool> charts;
  unsigned jobs = 0;  // 0 means all hardware threads
};

namespace detail {

inline std::pair<int, int> parse_scenario(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw CLI::ValidationError("--scenario", "expected L,S");
  try {
    std::size_t a = 0, b = 0;
    const int l = std::stoi(text.substr(0, comma), &a);
    const int s = std::stoi(text.substr(comma + 1), &b);
    if (a != comma || b != text.size() - comma - 1 || l < 0 || s < 0) throw std::invalid_argument("");
    return {l, s};
  } catch (const std::logic_error&) {
    throw CLI::ValidationError("--scenario", "expected two non-negative integers L,S");
  }
}

inline Scenario make_scenario(const ScenarioGrid& grid, int l, int s) {
  const bool inside = l >= grid.large_min && l <= grid.large_max && s >= grid.small_min &&
                      s <= grid.small_max;
  return Scenario{inside ? scenario_id(grid, l, s) : 0, l, s};
}

inline nlohmann::json ledger_json(const LedgerSummary& l) {
  return {{"batched_m3", l.batched},
          {"placed_m3", l.placed},
          {"discarded_m3", l.discarded},
          {"max_error_m3", l.max_error},
          {"checks", l.checks}};
}

inline nlohmann::json run_json(const RunResult& run) {
  nlohmann::json j;
  j["makespan_min"] = run.makespan;
  j["utilization"] = {{"large", run.class_utilization[0]}, {"small", run.class_utilization[1]}};
  const auto hours = truck_hours(run);
  j["truck_hours"] = {{"large", hours[0]}, {"small", hours[1]}};
  j["violations"] = {{"freshness", run.count(ViolationKind::kFreshness)},
                     {"interarrival", run.count(ViolationKind::kInterarrival)}};
  j["paver_stall_min"] = run.stall_time;
  j["ledger"] = ledger_json(run.ledger);
  return j;
}

class Session {
 public:
  Session(const CliOptions& opt, const ProjectConfig& config, std::ostream& out)
      : opt_(opt), config_(config), out_(out) {
    format_ = opt.format.value_or(config.output.format);
    charts_ = opt.charts.value_or(config.output.charts);
    std::filesystem::create_directories(opt.out_dir);
    if (charts_) std::filesystem::create_directories(opt.out_dir / "charts");
  }

  void table(const std::string& stem, const Table& t) {
    files_.push_back(write_table(opt_.out_dir, stem, t, format_).lexically_relative(opt_.out_dir).generic_string());
  }

  void chart(const std::string& stem, const ChartSpec& spec) {
    if (!charts_) return;
    const auto path = opt_.out_dir / "charts" / (stem + ".svg");
    write_text(path, render_svg(spec));
    files_.push_back(path.lexically_relative(opt_.out_dir).generic_string());
  }

  /// Tables and charts shared by simulate and adapt.
  void run_outputs(const Scenario& scenario, const RunResult& run,
                   const std::vector<FleetStep>& schedule, const CostRates& rates) {
    const ScenarioResult row = to_scenario_result(scenario, run, rates);
    std::vector<ScenarioResult> ranked;
    if (row.accepted) ranked.push_back(row);
    table("scenario_table", scenario_table(std::span(&row, 1), ranked, config_.objective,
                                           config_.process));
    std::vector<ChartSeries> util;
    for (TruckSize size : kTruckSizes) {
      const auto series = utilization_series(run, size, config_.output.utilization_window);
      const std::string name(to_string(size));
      table("utilization_" + name, utilization_table(series));
      util.push_back(utilization_chart_series(name, series));
      chart("utilization_" + name,
            ChartSpec{name + " truck utilization", "time (min)", "utilization", {util.back()},
                      std::make_pair(0.0, 1.0)});
    }
    table("fleet_schedule", fleet_schedule_table(schedule));
    table("violations", violations_table(run.violations));
    chart("fleet_schedule", ChartSpec{"Active trucks", "time (min)", "trucks",
                                      fleet_chart_series(schedule, run.makespan), {}});
  }

  void meta(nlohmann::json j) {
    j["tool"] = "rccsim";
    j["version"] = kToolVersion;
    j["command"] = opt_.command;
    j["config_path"] = opt_.config_path.generic_string();
    j["config"] = to_json(config_);
    j["format"] = to_string(format_);
    j["charts"] = charts_;
    files_.push_back("run_meta.json");
    std::sort(files_.begin(), files_.end());
    j["files"] = files_;
    write_text(opt_.out_dir / "run_meta.json", j.dump(2) + "\n");
  }

  std::ostream& out() { return out_; }

 private:
  const CliOptions& opt_;
  const ProjectConfig& config_;
  std::ostream& out_;
  OutputFormat format_;
  bool charts_;
  std::vector<std::string> files_;
};

inline unsigned job_count(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

inline void print_run(std::ostream& out, const Scenario& s, const RunResult& run) {
  out << "scenario #" << s.id << " (" << s.n_large << " large, " << s.n_small << " small): makespan "
      << fixed(run.makespan, 3) << " min, utilization large " << fixed(run.class_utilization[0], 4)
      << " small " << fixed(run.class_utilization[1], 4) << ", violations " << run.violations.size()
      << "\n";
}

inline int cmd_simulate(const CliOptions& opt, const LoadedConfig& loaded, std::ostream& out) {
  const ProjectConfig& c = loaded.config;
  const auto [l, s] = *opt.scenario;
  const Scenario scenario = make_scenario(c.grid, l, s);
  const RunResult run = simulate(c.process, scenario.fleet());
  Session session(opt, c, out);
  session.run_outputs(scenario, run, fleet_schedule(run), c.costs);
  nlohmann::json meta;
  meta["scenario"] = {{"id", scenario.id}, {"n_large", l}, {"n_small", s}};
  meta["run"] = run_json(run);
  meta["warnings"] = loaded.warnings;
  session.meta(meta);
  print_run(out, scenario, run);
  return exit_code::kOk;
}

inline std::vector<ScenarioResult> run_sweep(const ProjectConfig& c, unsigned jobs) {
  return sweep(c.grid, c.process, c.costs, jobs);
}

inline int cmd_sweep(const CliOptions& opt, const LoadedConfig& loaded, std::ostream& out,
                     std::ostream& err) {
  const ProjectConfig& c = loaded.config;
  const auto results = run_sweep(c, job_count(opt.jobs));
  std::vector<ScenarioResult> ranked;
  std::string infeasible;
  try {
    ranked = rank(results, c.objective, c.process);
  } catch (const NoFeasibleScenario& e) {
    infeasible = e.what();
  }
  Session session(opt, c, out);
  session.table("scenario_table", scenario_table(results, ranked, c.objective, c.process));
  nlohmann::json meta;
  meta["scenarios"] = results.size();
  meta["accepted"] = ranked.size();
  meta["warnings"] = loaded.warnings;
  if (!ranked.empty()) {
    const auto& w = ranked.front().scenario;
    meta["winner"] = {{"id", w.id}, {"n_large", w.n_large}, {"n_small", w.n_small}};
  } else {
    meta["diagnostic"] = infeasible;
  }
  session.meta(meta);
  out << results.size() << " scenarios, " << ranked.size() << " accepted\n";
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const auto& r = ranked[i];
    out << "  " << i + 1 << ". #" << r.scenario.id << " (" << r.scenario.n_large << " large, "
        << r.scenario.n_small << " small) objective "
        << fixed(objective(r, c.objective, c.process), 4) << "\n";
  }
  if (ranked.empty()) {
    err << "error: " << infeasible << "\n";
    return exit_code::kInfeasible;
  }
  return exit_code::kOk;
}

inline Table reviews_table(const std::vector<ReviewRecord>& reviews) {
  Table t;
  t.header = {"time_min", "class",  "haul_distance_m", "cycle_min", "required",
              "target",   "active", "pending_in",      "pending_out", "released",
              "reactivated"};
  for (const auto& r : reviews) {
    t.rows.push_back({Cell(r.time, 3), to_string(r.size), Cell(r.haul_distance, 3),
                      Cell(r.cycle_time, 4), r.required, r.target, r.before.stock,
                      r.before.inflow, r.before.outflow, r.released, r.reactivated});
  }
  return t;
}

inline int cmd_adapt(const CliOptions& opt, const LoadedConfig& loaded, std::ostream& out,
                     std::ostream& err) {
  const ProjectConfig& c = loaded.config;
  Scenario scenario;
  if (opt.scenario) {
    scenario = make_scenario(c.grid, opt.scenario->first, opt.scenario->second);
  } else {
    const auto results = run_sweep(c, job_count(opt.jobs));
    try {
      scenario = rank(results, c.objective, c.process).front().scenario;
    } catch (const NoFeasibleScenario& e) {
      err << "error: no scenario to seed the controller: " << e.what() << "\n";
      return exit_code::kInfeasible;
    }
  }
  const RunResult fixed_run = simulate(c.process, scenario.fleet());
  const AdaptiveResult adaptive = simulate_adaptive(c.process, scenario.fleet(), c.control);
  Session session(opt, c, out);
  session.run_outputs(scenario, adaptive.run, adaptive.schedule, c.costs);
  session.table("reviews", reviews_table(adaptive.reviews));
  nlohmann::json meta;
  meta["scenario"] = {{"id", scenario.id}, {"n_large", scenario.n_large},
                      {"n_small", scenario.n_small}, {"seeded_from_sweep", !opt.scenario}};
  meta["run"] = run_json(adaptive.run);
  meta["fixed_fleet_run"] = run_json(fixed_run);
  meta["cost"] = {{"adaptive", cost(adaptive.run, c.costs)}, {"fixed", cost(fixed_run, c.costs)}};
  meta["reviews"] = adaptive.reviews.size();
  meta["warnings"] = loaded.warnings;
  session.meta(meta);
  out << "fixed:    ";
  print_run(out, scenario, fixed_run);
  out << "adaptive: ";
  print_run(out, scenario, adaptive.run);
  return exit_code::kOk;
}

}  // namespace detail

/// Parses arguments, runs one command and maps failures to exit codes.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
  CLI::App app{"Concrete supply simulator for roller-compacted pavement", "rccsim"};
  app.require_subcommand(1);
  CliOptions opt;
  std::string scenario_text, format_text, charts_text;

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "project config (JSON)")->required();
    cmd->add_option("--out-dir", opt.out_dir, "output directory")->capture_default_str();
    cmd->add_option("--format", format_text, "table format")->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--charts", charts_text, "write SVG charts")->check(CLI::IsMember({"on", "off"}));
  };
  auto* simulate_cmd = app.add_subcommand("simulate", "single run of a fixed fleet");
  common(simulate_cmd);
  simulate_cmd->add_option("--scenario", scenario_text, "fleet as LARGE,SMALL")->required();
  auto* sweep_cmd = app.add_subcommand("sweep", "evaluate and rank the scenario grid");
  common(sweep_cmd);
  sweep_cmd->add_option("--jobs", opt.jobs, "worker threads (0 = all cores)");
  auto* adapt_cmd = app.add_subcommand("adapt", "run with the fleet controller");
  common(adapt_cmd);
  adapt_cmd->add_option("--scenario", scenario_text, "fleet as LARGE,SMALL (default: sweep winner)");
  adapt_cmd->add_option("--jobs", opt.jobs, "worker threads for the seeding sweep");

  try {
    app.parse(argc, argv);
    if (!scenario_text.empty()) opt.scenario = detail::parse_scenario(scenario_text);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_code::kOk : exit_code::kUsage;
  }
  if (!format_text.empty()) opt.format = format_text == "csv" ? OutputFormat::kCsv : OutputFormat::kJson;
  if (!charts_text.empty()) opt.charts = charts_text == "on";
  opt.command = app.get_subcommands().front()->get_name();

  LoadedConfig loaded;
  try {
    loaded = load_config(opt.config_path);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return exit_code::kConfig;
  }
  for (const auto& w : loaded.warnings) err << "warning: " << w << "\n";

  try {
    if (opt.command == "simulate") return detail::cmd_simulate(opt, loaded, out);
    if (opt.command == "sweep") return detail::cmd_sweep(opt, loaded, out, err);
    return detail::cmd_adapt(opt, loaded, out, err);
  } catch (const StarvedModel& e) {
    err << "starved model: " << e.what() << "\n";
    return exit_code::kStarved;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return exit_code::kRuntime;
  }
}

}  // namespace rccsim
