#pragma once

// Project configuration as a JSON document: load with defaults, validate,
// and write back so that load(save(c)) == c.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rccsim/adaptive.hpp"
#include "rccsim/scenario.hpp"

namespace rccsim {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

enum class OutputFormat { kCsv, kJson };

struct OutputOptions {
  OutputFormat format = OutputFormat::kCsv;
  bool charts = true;
  double utilization_window = 60.0;  // minutes, tumbling

  friend bool operator==(const OutputOptions&, const OutputOptions&) = default;
};

struct ProjectConfig {
  ProcessConfig process;
  ScenarioGrid grid;
  Objective objective = Objective::kMeanOfClasses;
  ControlPolicy control;
  CostRates costs;
  OutputOptions output;

  friend bool operator==(const ProjectConfig&, const ProjectConfig&) = default;
};

struct LoadedConfig {
  ProjectConfig config;
  std::vector<std::string> warnings;
};

inline std::string_view to_string(DispatchMode m) { return m == DispatchMode::kPull ? "pull" : "push"; }

inline std::string_view to_string(DispatchPriority p) {
  switch (p) {
    case DispatchPriority::kSmallFirst: return "small-first";
    case DispatchPriority::kLargeFirst: return "large-first";
    case DispatchPriority::kFifo: return "fifo";
  }
  return "?";
}

inline std::string_view to_string(Objective o) {
  return o == Objective::kMeanOfClasses ? "mean-of-classes" : "capacity-weighted";
}

inline std::string_view to_string(OutputFormat f) { return f == OutputFormat::kCsv ? "csv" : "json"; }

/// Checks every cross-field rule; the error names the offending field.
inline void validate(const ProjectConfig& c) {
  const auto& p = c.process;
  auto positive = [](const char* field, double v) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be positive");
  };
  auto non_negative = [](const char* field, double v) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be non-negative");
  };
  positive("road.length_m", p.road.length);
  positive("road.width_m", p.road.width);
  positive("road.thickness_m", p.road.thickness);
  non_negative("road.plant_chainage_m", p.road.plant_chainage);
  if (p.road.plant_chainage > p.road.length) {
    throw ConfigError("road.plant_chainage_m", "lies outside the road");
  }
  positive("speeds_kmh.loaded", p.speeds.loaded);
  positive("speeds_kmh.empty", p.speeds.empty);
  positive("paver.placement_rate_m3_per_min", p.paver.placement_rate);
  positive("paver.hopper_capacity_m3", p.paver.hopper_capacity);
  for (TruckSize size : kTruckSizes) {
    const std::string base = "trucks." + std::string(to_string(size)) + ".";
    const auto& k = p.truck_class(size);
    positive((base + "capacity_m3").c_str(), k.capacity);
    positive((base + "load_min").c_str(), k.load_duration);
    positive((base + "dump_min").c_str(), k.dump_duration);
    if (k.capacity > p.paver.hopper_capacity) {
      throw ConfigError(base + "capacity_m3", "exceeds paver.hopper_capacity_m3");
    }
  }
  positive("constraints.freshness_limit_min", p.constraints.freshness_limit);
  positive("constraints.interarrival_limit_min", p.constraints.interarrival_limit);
  non_negative("constraints.compaction_lag_min", p.constraints.compaction_lag);
  non_negative("dispatch.arrival_target_level_m3", p.dispatch.arrival_target_level);
  if (p.dispatch.arrival_target_level > p.paver.hopper_capacity) {
    throw ConfigError("dispatch.arrival_target_level_m3", "exceeds paver.hopper_capacity_m3");
  }
  if (c.grid.large_min < 0 || c.grid.small_min < 0) throw ConfigError("grid", "negative bound");
  if (c.grid.large_span() <= 0) throw ConfigError("grid.large_max", "below grid.large_min");
  if (c.grid.small_span() <= 0) throw ConfigError("grid.small_max", "below grid.small_min");
  try {
    validate(c.control);
  } catch (const PolicyError& e) {
    throw ConfigError("control", e.what());
  }
  for (TruckSize size : kTruckSizes) {
    non_negative(("costs.truck_hourly." + std::string(to_string(size))).c_str(),
                 c.costs.truck_hourly[index_of(size)]);
  }
  non_negative("costs.plant_hourly", c.costs.plant_hourly);
  non_negative("costs.paver_hourly", c.costs.paver_hourly);
  non_negative("costs.mobilization", c.costs.mobilization);
  positive("output.utilization_window_min", c.output.utilization_window);
}

namespace detail {

using nlohmann::json;

// Walks one JSON object, remembering which keys were read so that anything
// left over can be reported as unknown.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = find(key)) {
      if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  bool number_present(const std::string& key, double& out) {
    const bool present = j_.contains(key);
    number(key, out);
    return present;
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = find(key)) {
      if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = find(key)) {
      if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  template <class Enum>
  void choice(const std::string& key, Enum& out, std::initializer_list<Enum> options) {
    const json* v = find(key);
    if (!v) return;
    if (!v->is_string()) throw ConfigError(field(key), "expected a string");
    const auto s = v->get<std::string>();
    std::string allowed;
    for (Enum e : options) {
      if (s == to_string(e)) {
        out = e;
        return;
      }
      allowed += (allowed.empty() ? "" : ", ") + std::string(to_string(e));
    }
    throw ConfigError(field(key), "unknown value '" + s + "' (expected " + allowed + ")");
  }

  std::optional<ObjectReader> object(const std::string& key) {
    const json* v = find(key);
    if (!v) return std::nullopt;
    return ObjectReader(*v, field(key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown field");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline void read_class(ObjectReader& r, TruckClass& k) {
  r.number("capacity_m3", k.capacity);
  r.number("load_min", k.load_duration);
  r.number("dump_min", k.dump_duration);
  r.finish();
}

inline void read_band(ObjectReader& r, double& band) {
  const json* v = r.find("hysteresis_band");
  if (!v) return;
  if (v->is_string() && v->get<std::string>() == "inf") {
    band = std::numeric_limits<double>::infinity();
  } else if (v->is_number_integer() && v->get<long long>() >= 0) {
    band = static_cast<double>(v->get<long long>());
  } else {
    throw ConfigError(r.field("hysteresis_band"), "expected a whole number or \"inf\"");
  }
}

}  // namespace detail

/// Parses a config document; absent fields keep their defaults.
inline LoadedConfig parse_config_json(const nlohmann::json& doc) {
  using detail::ObjectReader;
  LoadedConfig out;
  ProjectConfig& c = out.config;
  ProcessConfig& p = c.process;
  ObjectReader root(doc, "");

  if (auto r = root.object("road")) {
    r->number("length_m", p.road.length);
    r->number("width_m", p.road.width);
    if (!r->number_present("thickness_m", p.road.thickness)) {
      out.warnings.push_back("road.thickness_m missing, using " + std::to_string(p.road.thickness) +
                             " m");
    }
    r->number("plant_chainage_m", p.road.plant_chainage);
    r->finish();
  } else {
    out.warnings.push_back("road missing, using default geometry");
  }
  if (auto r = root.object("speeds_kmh")) {
    r->number("loaded", p.speeds.loaded);
    r->number("empty", p.speeds.empty);
    r->finish();
  }
  if (auto r = root.object("trucks")) {
    for (TruckSize size : kTruckSizes) {
      if (auto k = r->object(std::string(to_string(size)))) {
        detail::read_class(*k, p.classes[index_of(size)]);
      }
    }
    r->finish();
  }
  if (auto r = root.object("paver")) {
    r->number("placement_rate_m3_per_min", p.paver.placement_rate);
    r->number("hopper_capacity_m3", p.paver.hopper_capacity);
    r->finish();
  }
  if (auto r = root.object("constraints")) {
    r->number("freshness_limit_min", p.constraints.freshness_limit);
    r->number("interarrival_limit_min", p.constraints.interarrival_limit);
    r->number("compaction_lag_min", p.constraints.compaction_lag);
    r->finish();
  }
  if (auto r = root.object("dispatch")) {
    r->choice("mode", p.dispatch.mode, {DispatchMode::kPull, DispatchMode::kPush});
    r->choice("priority", p.dispatch.priority,
              {DispatchPriority::kSmallFirst, DispatchPriority::kLargeFirst, DispatchPriority::kFifo});
    r->number("arrival_target_level_m3", p.dispatch.arrival_target_level);
    r->finish();
  }
  if (auto r = root.object("grid")) {
    r->integer("large_min", c.grid.large_min);
    r->integer("large_max", c.grid.large_max);
    r->integer("small_min", c.grid.small_min);
    r->integer("small_max", c.grid.small_max);
    r->finish();
  }
  root.choice("objective", c.objective, {Objective::kMeanOfClasses, Objective::kCapacityWeighted});
  if (auto r = root.object("control")) {
    r->number("review_interval_min", c.control.review_interval);
    detail::read_band(*r, c.control.hysteresis_band);
    if (auto m = r->object("min_active")) {
      for (TruckSize size : kTruckSizes) {
        m->integer(std::string(to_string(size)), c.control.min_active[index_of(size)]);
      }
      m->finish();
    }
    if (auto m = r->object("max_active")) {
      for (TruckSize size : kTruckSizes) {
        const std::string key(to_string(size));
        if (const auto* v = m->find(key); v && !v->is_null()) {
          if (!v->is_number_integer()) throw ConfigError(m->field(key), "expected an integer or null");
          c.control.max_active[index_of(size)] = v->get<int>();
        }
      }
      m->finish();
    }
    r->number("mobilization_delay_min", c.control.mobilization_delay);
    r->boolean("small_fleet_controlled", c.control.small_fleet_controlled);
    r->finish();
  }
  if (auto r = root.object("costs")) {
    if (auto t = r->object("truck_hourly")) {
      for (TruckSize size : kTruckSizes) {
        t->number(std::string(to_string(size)), c.costs.truck_hourly[index_of(size)]);
      }
      t->finish();
    }
    r->number("plant_hourly", c.costs.plant_hourly);
    r->number("paver_hourly", c.costs.paver_hourly);
    r->number("mobilization", c.costs.mobilization);
    r->finish();
  }
  if (auto r = root.object("output")) {
    r->choice("format", c.output.format, {OutputFormat::kCsv, OutputFormat::kJson});
    r->boolean("charts", c.output.charts);
    r->number("utilization_window_min", c.output.utilization_window);
    r->finish();
  }
  root.finish();
  validate(c);
  return out;
}

inline LoadedConfig parse_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("<document>", e.what());
  }
  return parse_config_json(doc);
}

inline LoadedConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<document>", "cannot read " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

inline nlohmann::json to_json(const ProjectConfig& c) {
  using nlohmann::json;
  const ProcessConfig& p = c.process;
  json j;
  j["road"] = {{"length_m", p.road.length},
               {"width_m", p.road.width},
               {"thickness_m", p.road.thickness},
               {"plant_chainage_m", p.road.plant_chainage}};
  j["speeds_kmh"] = {{"loaded", p.speeds.loaded}, {"empty", p.speeds.empty}};
  for (TruckSize size : kTruckSizes) {
    const auto& k = p.truck_class(size);
    j["trucks"][std::string(to_string(size))] = {
        {"capacity_m3", k.capacity}, {"load_min", k.load_duration}, {"dump_min", k.dump_duration}};
  }
  j["paver"] = {{"placement_rate_m3_per_min", p.paver.placement_rate},
                {"hopper_capacity_m3", p.paver.hopper_capacity}};
  j["constraints"] = {{"freshness_limit_min", p.constraints.freshness_limit},
                      {"interarrival_limit_min", p.constraints.interarrival_limit},
                      {"compaction_lag_min", p.constraints.compaction_lag}};
  j["dispatch"] = {{"mode", to_string(p.dispatch.mode)},
                   {"priority", to_string(p.dispatch.priority)},
                   {"arrival_target_level_m3", p.dispatch.arrival_target_level}};
  j["grid"] = {{"large_min", c.grid.large_min},
               {"large_max", c.grid.large_max},
               {"small_min", c.grid.small_min},
               {"small_max", c.grid.small_max}};
  j["objective"] = to_string(c.objective);
  json control;
  control["review_interval_min"] = c.control.review_interval;
  if (c.control.neutralized()) {
    control["hysteresis_band"] = "inf";
  } else {
    control["hysteresis_band"] = static_cast<long long>(c.control.hysteresis_band);
  }
  for (TruckSize size : kTruckSizes) {
    const std::string key(to_string(size));
    control["min_active"][key] = c.control.min_active[index_of(size)];
    const auto& mx = c.control.max_active[index_of(size)];
    control["max_active"][key] = mx ? json(*mx) : json(nullptr);
  }
  control["mobilization_delay_min"] = c.control.mobilization_delay;
  control["small_fleet_controlled"] = c.control.small_fleet_controlled;
  j["control"] = control;
  for (TruckSize size : kTruckSizes) {
    j["costs"]["truck_hourly"][std::string(to_string(size))] = c.costs.truck_hourly[index_of(size)];
  }
  j["costs"]["plant_hourly"] = c.costs.plant_hourly;
  j["costs"]["paver_hourly"] = c.costs.paver_hourly;
  j["costs"]["mobilization"] = c.costs.mobilization;
  j["output"] = {{"format", to_string(c.output.format)},
                 {"charts", c.output.charts},
                 {"utilization_window_min", c.output.utilization_window}};
  return j;
}

inline std::string dump_config(const ProjectConfig& c) { return to_json(c).dump(2) + "\n"; }

inline void save_config(const ProjectConfig& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("<document>", "cannot write " + path.string());
  out << dump_config(c);
}

}  // namespace rccsim
