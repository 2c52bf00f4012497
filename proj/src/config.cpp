#include "terra/config.hpp"

#include <cstdint>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

#include "terra/error.hpp"
#include "terra/text.hpp"

namespace terra {

namespace {

struct Binding {
  const char* section;
  const char* key;
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
  bool dumped = true;
};

template <typename T>
T parse_or_throw(const std::string& value) {
  const auto v = parse_number<T>(value);
  if (!v) throw ConfigError("cannot parse '" + value + "' as a number");
  return *v;
}

Binding num(const char* section, const char* key, double& ref) {
  return {section, key, [&ref] { return format_double(ref); },
          [&ref](const std::string& v) { ref = parse_or_throw<double>(v); }};
}

Binding num(const char* section, const char* key, int& ref) {
  return {section, key, [&ref] { return std::to_string(ref); },
          [&ref](const std::string& v) { ref = parse_or_throw<int>(v); }};
}

Binding num(const char* section, const char* key, std::uint64_t& ref) {
  return {section, key, [&ref] { return std::to_string(ref); },
          [&ref](const std::string& v) { ref = parse_or_throw<std::uint64_t>(v); }};
}

template <typename E, typename FromString>
Binding enumeration(const char* section, const char* key, E& ref, FromString from) {
  return {section, key, [&ref] { return to_string(ref); },
          [&ref, from](const std::string& v) { ref = from(v); }};
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<Binding> bindings(TaskSpec& t) {
  MppiConfig& m = t.planner.mppi;
  FeasibilityLimits& l = t.planner.limits;
  VehicleParams& v = t.planner.vehicle;
  ConstraintParams& c = t.planner.constraints;
  TaskCost& k = t.planner.task;
  ControllerGains& g = t.gains;
  ActuatorMap& a = t.actuators;
  PlantParams& p = t.plant;
  TerrainSpec& s = t.terrain;

  std::vector<Binding> b = {
      num("mppi", "horizon", m.horizon),
      num("mppi", "n_conv", m.n_conv),
      num("mppi", "n_narrow", m.n_narrow),
      num("mppi", "n_scaled", m.n_scaled),
      num("mppi", "n_reset", m.n_reset),
      num("mppi", "sigma_v", m.sigma_v),
      num("mppi", "sigma_kappa", m.sigma_kappa),
      num("mppi", "narrow_scale", m.narrow_scale),
      num("mppi", "speed_scale", m.speed_scale),
      num("mppi", "kappa_reset", m.kappa_reset),
      num("mppi", "lambda", m.lambda),
      num("mppi", "dt", m.dt),
      num("mppi", "seed", m.seed),
      enumeration("mppi", "rollover_mode", m.rollover_mode, rollover_cost_mode_from_string),
      num("mppi", "roll_threshold", m.roll_threshold),
      num("mppi", "out_of_map_penalty", m.out_of_map_penalty),
      num("mppi", "ditch_phases", m.ditch_phases),
      num("mppi", "ditch_margin", m.ditch_margin),

      num("limits", "dv_max", l.dv_max),
      num("limits", "dkappa_max", l.dkappa_max),
      num("limits", "v_min", l.v_min),
      num("limits", "kappa_max", l.kappa_max),
      num("limits", "v_cap", l.v_cap),
      num("limits", "v_floor", l.v_floor),

      num("vehicle", "mass", v.mass),
      num("vehicle", "p1", v.p1),
      num("vehicle", "p2", v.p2),
      num("vehicle", "p3", v.p3),
      num("vehicle", "i22", v.i22),
      num("vehicle", "g", v.g),

      num("constraints", "rr_max", c.rr_max),
      num("constraints", "tau_min", c.tau_min),
      num("constraints", "tau_max", c.tau_max),
      num("constraints", "w1", c.w1),
      num("constraints", "w2", c.w2),
      num("constraints", "w3", c.w3),

      enumeration("task", "path", k.path, path_kind_from_string),
      num("task", "target_speed", k.target_speed),
      num("task", "w_speed", k.w_speed),
      num("task", "w_path", k.w_path),
      num("task", "w_heading", k.w_heading),
      num("task", "center_x", k.center_x),
      num("task", "center_y", k.center_y),
      num("task", "radius", k.radius),
      num("task", "direction", k.direction),
      num("task", "line_x", k.line_x),
      num("task", "line_y", k.line_y),
      num("task", "line_heading", k.line_heading),
      num("task", "sine_amplitude", k.sine_amplitude),
      num("task", "sine_wavelength", k.sine_wavelength),

      num("controller", "k_p", g.k_p),
      num("controller", "k_i", g.k_i),
      num("controller", "c1", g.c1),
      num("controller", "c2", g.c2),
      num("controller", "integral_limit", g.integral_limit),
      num("controller", "g", g.g),

      num("actuator", "throttle_scale", a.throttle_scale),
      num("actuator", "brake_scale", a.brake_scale),
      num("actuator", "max_steer", a.max_steer),

      num("plant", "wheelbase", p.wheelbase),
      num("plant", "track_width", p.track_width),
      num("plant", "drive_gain", p.drive_gain),
      num("plant", "brake_gain", p.brake_gain),
      num("plant", "drag", p.drag),
      num("plant", "dt", p.dt),
      num("plant", "delay", p.delay),
      num("plant", "g", p.g),
      enumeration("plant", "model", p.model, plant_model_from_string),

      enumeration("terrain", "kind", s.kind, terrain_kind_from_string),
      num("terrain", "size_x", s.size_x),
      num("terrain", "size_y", s.size_y),
      num("terrain", "resolution", s.resolution),
      num("terrain", "center_x", s.center_x),
      num("terrain", "center_y", s.center_y),
      num("terrain", "angle_deg", s.angle_deg),
      num("terrain", "azimuth_deg", s.azimuth_deg),
      num("terrain", "depth", s.depth),
      num("terrain", "half_width", s.half_width),
      num("terrain", "wall_angle_deg", s.wall_angle_deg),
      num("terrain", "axis_azimuth_deg", s.axis_azimuth_deg),
      num("terrain", "edge_blend", s.edge_blend),
      num("terrain", "radius", s.radius),
      num("terrain", "rim_width", s.rim_width),
      num("terrain", "amplitude", s.amplitude),
      num("terrain", "wavelength", s.wavelength),

      enumeration("run", "task", t.kind, task_kind_from_string),
      num("run", "duration", t.duration),
      num("run", "laps", t.laps),
      num("run", "end_distance", t.end_distance),
      num("run", "start_x", t.start.x),
      num("run", "start_y", t.start.y),
      num("run", "start_psi", t.start.psi),
      num("run", "initial_speed", t.initial_speed),
      num("run", "threads", t.threads),
  };
  // Constraint weights are also reachable under mppi.
  for (auto [key, ref] : {std::pair{"w1", &c.w1}, std::pair{"w2", &c.w2}, std::pair{"w3", &c.w3}}) {
    Binding alias = num("mppi", key, *ref);
    alias.dumped = false;
    b.push_back(std::move(alias));
  }
  return b;
}

}  // namespace

std::vector<ConfigEntry> parse_config(std::istream& in) {
  std::vector<ConfigEntry> out;
  std::string section;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(std::string_view(raw).substr(0, hash));
    if (text.empty()) continue;
    if (text.front() == '[') {
      if (text.back() != ']') throw ParseError("unterminated section header", line);
      section = trim(std::string_view(text).substr(1, text.size() - 2));
      if (section.empty()) throw ParseError("empty section name", line);
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line);
    ConfigEntry e;
    e.section = section;
    e.key = trim(std::string_view(text).substr(0, eq));
    e.value = trim(std::string_view(text).substr(eq + 1));
    e.line = line;
    if (e.key.empty()) throw ParseError("missing key", line);
    if (e.value.empty()) throw ParseError("missing value for '" + e.key + "'", line);
    if (section.empty()) throw ParseError("key '" + e.key + "' outside any section", line);
    out.push_back(std::move(e));
  }
  return out;
}

void apply_setting(TaskSpec& spec, const std::string& section, const std::string& key,
                   const std::string& value) {
  for (Binding& b : bindings(spec)) {
    if (section == b.section && key == b.key) {
      try {
        b.set(value);
      } catch (const Error& e) {
        throw ConfigError(section + "." + key + ": " + e.what());
      }
      return;
    }
  }
  throw ConfigError("unknown key '" + section + "." + key + "'");
}

void apply_override(TaskSpec& spec, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq) {
    throw ConfigError("override '" + assignment + "' is not section.key=value");
  }
  apply_setting(spec, trim(std::string_view(assignment).substr(0, dot)),
                trim(std::string_view(assignment).substr(dot + 1, eq - dot - 1)),
                trim(std::string_view(assignment).substr(eq + 1)));
}

TaskSpec load_config(std::istream& in, TaskSpec base) {
  for (const ConfigEntry& e : parse_config(in)) {
    try {
      apply_setting(base, e.section, e.key, e.value);
    } catch (const ConfigError& err) {
      throw ConfigError("line " + std::to_string(e.line) + ": " + err.what());
    }
  }
  base.validate();
  return base;
}

TaskSpec load_config_file(const std::string& path, TaskSpec base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  return load_config(in, std::move(base));
}

void dump_config(std::ostream& out, const TaskSpec& spec) {
  TaskSpec copy = spec;
  std::string section;
  for (const Binding& b : bindings(copy)) {
    if (!b.dumped) continue;
    if (section != b.section) {
      if (!section.empty()) out << '\n';
      section = b.section;
      out << '[' << section << "]\n";
    }
    out << b.key << " = " << b.get() << '\n';
  }
}

std::string dump_config(const TaskSpec& spec) {
  std::ostringstream out;
  dump_config(out, spec);
  return out.str();
}

std::vector<std::string> config_keys() {
  TaskSpec scratch;
  std::vector<std::string> keys;
  for (const Binding& b : bindings(scratch)) {
    if (b.dumped) keys.push_back(std::string(b.section) + "." + b.key);
  }
  return keys;
}

std::string config_task_name(const std::vector<ConfigEntry>& entries) {
  std::string name;
  for (const ConfigEntry& e : entries) {
    if (e.section == "run" && e.key == "task") name = e.value;
  }
  return name;
}

}  // namespace terra
