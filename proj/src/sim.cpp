#include "terra/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "terra/error.hpp"
#include "terra/text.hpp"

namespace terra {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kPi = std::numbers::pi;

WheelFootprint footprint_of(const PlantParams& p) { return {p.wheelbase, p.track_width}; }

Attitude attitude_or_throw(const ElevationMap& map, const PlanarState& pose,
                           const WheelFootprint& fp) {
  const AttitudeSample a = sample_attitude(map, pose.x, pose.y, pose.psi, fp);
  if (a.status != AttitudeSample::Status::ok) {
    throw OutOfBounds("vehicle footprint left the map at (" + format_double(pose.x) + ", " +
                      format_double(pose.y) + ")");
  }
  return a.attitude;
}

bool is_circle(TaskKind k) { return k == TaskKind::hill_circle || k == TaskKind::flat_circle; }

// Tracks progress around the task path for stop conditions and metrics.
struct Progress {
  double cx = 0.0;
  double cy = 0.0;
  double angle = 0.0;
  double swept = 0.0;
  bool started = false;

  void add(double x, double y) {
    const double a = std::atan2(y - cy, x - cx);
    if (started) swept += wrap_angle(a - angle);
    angle = a;
    started = true;
  }
  double laps() const { return std::abs(swept) / (2.0 * kPi); }
};

double along_path(const TaskCost& task, double x, double y) {
  return (x - task.line_x) * std::cos(task.line_heading) +
         (y - task.line_y) * std::sin(task.line_heading);
}

}  // namespace

std::string to_string(PlantModel model) {
  return model == PlantModel::dynamic ? "dynamic" : "ideal_kinematic";
}

PlantModel plant_model_from_string(const std::string& name) {
  if (name == "dynamic") return PlantModel::dynamic;
  if (name == "ideal_kinematic" || name == "ideal") return PlantModel::ideal_kinematic;
  throw ConfigError("unknown plant model '" + name + "'");
}

int PlantParams::substeps(double planner_dt) const {
  if (!(dt > 0.0) || !(planner_dt > 0.0)) throw ConfigError("plant.dt must be > 0");
  const double ratio = planner_dt / dt;
  const long n = std::lround(ratio);
  if (n < 1 || std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
    throw ConfigError("plant.dt must divide the planner dt");
  }
  return static_cast<int>(n);
}

void PlantParams::validate(double planner_dt) const {
  if (!(wheelbase > 0.0 && track_width > 0.0)) throw ConfigError("plant geometry must be > 0");
  if (!(drive_gain > 0.0 && brake_gain > 0.0)) throw ConfigError("plant gains must be > 0");
  if (!(drag >= 0.0)) throw ConfigError("plant.drag must be >= 0");
  if (delay < 0) throw ConfigError("plant.delay must be >= 0");
  if (!(g > 0.0)) throw ConfigError("plant.g must be > 0");
  substeps(planner_dt);
}

PlantState step_plant(const PlantState& state, const ActuatorCommand& command,
                      const ElevationMap& map, const PlantParams& params, double dt) {
  const Attitude att = attitude_or_throw(map, state.pose, footprint_of(params));
  const double kappa = std::tan(command.steer) / params.wheelbase;
  const double v = state.v;
  const double sgn = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
  const double accel = params.drive_gain * command.throttle -
                       params.brake_gain * command.brake * sgn +
                       params.g * std::sin(att.pitch) - params.drag * v;
  PlantState next = state;
  next.pose = step(state.pose, {v, kappa}, dt);
  next.v = std::max(0.0, v + accel * dt);
  return next;
}

PlantState step_plant_ideal(const PlantState& state, const Control& u, const ElevationMap& map,
                            const PlantParams& params, double dt) {
  attitude_or_throw(map, state.pose, footprint_of(params));
  PlantState next = state;
  next.pose = step(state.pose, u, dt);
  next.v = u.v;
  return next;
}

GroundTruth ground_truth_diagnostics(std::span<const TrackSample> track, const ElevationMap& map,
                                     const VehicleParams& vehicle, const WheelFootprint& footprint,
                                     double sample_dt, int stride) {
  if (!(sample_dt > 0.0) || stride < 1) throw InvalidSpec("bad diagnostic sampling");
  const std::size_t n = track.size();
  GroundTruth gt;
  gt.roll.resize(n);
  gt.pitch.resize(n);
  gt.kappa.resize(n);
  gt.rr.resize(n);
  gt.tau.resize(n);
  if (n == 0) return gt;

  for (std::size_t k = 0; k < n; ++k) {
    const TrackSample& s = track[k];
    const Attitude a = attitude_or_throw(map, {s.x, s.y, s.psi}, footprint);
    gt.roll[k] = a.roll;
    gt.pitch[k] = a.pitch;
  }
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double ds = std::hypot(track[k + 1].x - track[k].x, track[k + 1].y - track[k].y);
    gt.kappa[k] = ds > 1e-9 ? wrap_angle(track[k + 1].psi - track[k].psi) / ds : 0.0;
  }
  if (n > 1) gt.kappa[n - 1] = gt.kappa[n - 2];

  // Difference each phase of the track at the planner interval.
  const double rate_dt = sample_dt * stride;
  std::vector<double> omega2(n, 0.0);
  std::vector<double> alpha2(n, 0.0);
  std::vector<double> sub, sub_w, sub_a;
  for (int phase = 0; phase < stride; ++phase) {
    sub.clear();
    for (std::size_t k = static_cast<std::size_t>(phase); k < n; k += stride) {
      sub.push_back(gt.pitch[k]);
    }
    if (sub.size() < 3) continue;
    sub_w.assign(sub.size(), 0.0);
    sub_a.assign(sub.size(), 0.0);
    pitch_rates_into(sub, rate_dt, sub_w, sub_a);
    for (std::size_t j = 0; j < sub.size(); ++j) {
      omega2[static_cast<std::size_t>(phase) + j * stride] = sub_w[j];
      alpha2[static_cast<std::size_t>(phase) + j * stride] = sub_a[j];
    }
  }

  for (std::size_t k = 0; k < n; ++k) {
    const double v = track[k].v;
    gt.rr[k] = rollover_risk_unchecked(v, gt.kappa[k], std::sin(gt.roll[k]),
                                       std::cos(gt.roll[k]), vehicle.g);
    gt.tau[k] = ditch_torque(v, gt.pitch[k], omega2[k], alpha2[k], vehicle);
  }
  return gt;
}

std::string to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::hill_circle:
      return "hill_circle";
    case TaskKind::flat_circle:
      return "flat_circle";
    case TaskKind::ditch_cross:
      return "ditch_cross";
    case TaskKind::slalom:
      return "slalom";
  }
  return "hill_circle";
}

TaskKind task_kind_from_string(const std::string& name) {
  std::string n = name;
  std::replace(n.begin(), n.end(), '-', '_');
  if (n == "hill_circle") return TaskKind::hill_circle;
  if (n == "flat_circle") return TaskKind::flat_circle;
  if (n == "ditch_cross") return TaskKind::ditch_cross;
  if (n == "slalom") return TaskKind::slalom;
  throw ConfigError("unknown task '" + name + "'");
}

void TaskSpec::validate() const {
  terrain.validate();
  planner.validate();
  gains.validate();
  actuators.validate();
  plant.validate(planner.mppi.dt);
  if (!(duration > 0.0)) throw ConfigError("run.duration must be > 0");
  if (!(laps >= 0.0) || !(end_distance >= 0.0)) {
    throw ConfigError("run.laps and run.end_distance must be >= 0");
  }
  if (is_circle(kind) && !(planner.task.radius > 0.0)) {
    throw ConfigError("circle tasks need task.radius > 0");
  }
  if (!(initial_speed >= 0.0)) throw ConfigError("run.initial_speed must be >= 0");
  if (threads < 0) throw ConfigError("run.threads must be >= 0");
}

TaskSpec make_task(TaskKind kind) {
  TaskSpec spec;
  spec.kind = kind;
  spec.terrain.size_x = 100.0;
  spec.terrain.size_y = 100.0;
  TaskCost& task = spec.planner.task;
  // Closed-loop tuning shared by every task: a colder softmax and gentler
  // curvature noise keep steering jitter from eating speed, and stiffer
  // speed gains keep the plant close to the planned profile.
  spec.planner.mppi.lambda = 10.0;
  spec.planner.mppi.sigma_kappa = 0.01;
  spec.planner.limits.dkappa_max = 0.005;
  spec.gains.k_p = 3.0;
  spec.gains.k_i = 1.0;
  spec.gains.integral_limit = 4.0;
  switch (kind) {
    case TaskKind::hill_circle:
    case TaskKind::flat_circle:
      spec.terrain.kind = kind == TaskKind::hill_circle ? TerrainKind::incline : TerrainKind::flat;
      spec.terrain.angle_deg = 10.0;
      spec.terrain.azimuth_deg = 0.0;
      task.path = PathKind::circle;
      task.radius = 15.0;
      task.direction = 1;
      task.target_speed = 10.0;
      task.w_speed = 1.0;
      task.w_path = 4.0;
      task.w_heading = 20.0;
      spec.start = {task.radius, 0.0, kPi / 2.0};
      spec.duration = kind == TaskKind::hill_circle ? 150.0 : 40.0;
      spec.laps = kind == TaskKind::hill_circle ? 6.0 : 0.0;
      break;
    case TaskKind::ditch_cross:
      spec.terrain.kind = TerrainKind::v_ditch;
      spec.terrain.axis_azimuth_deg = 90.0;
      spec.terrain.edge_blend = 1.5;
      spec.terrain.resolution = 0.1;
      spec.terrain.size_y = 40.0;
      task.path = PathKind::line;
      task.line_x = -40.0;
      task.line_y = 0.0;
      task.line_heading = 0.0;
      task.target_speed = 6.0;
      task.w_speed = 1.0;
      task.w_path = 4.0;
      task.w_heading = 20.0;
      spec.planner.limits.v_cap = 5.0;
      spec.planner.constraints.w2 = 100.0;
      spec.planner.constraints.w3 = 100.0;
      spec.planner.mppi.ditch_margin = 2.0;
      spec.start = {-40.0, 0.0, 0.0};
      spec.initial_speed = 5.0;
      spec.duration = 60.0;
      spec.end_distance = 70.0;
      spec.laps = 0.0;
      break;
    case TaskKind::slalom:
      spec.terrain.kind = TerrainKind::flat;
      task.path = PathKind::sine;
      task.line_x = -40.0;
      task.line_heading = 0.0;
      task.sine_amplitude = 2.0;
      task.sine_wavelength = 40.0;
      task.target_speed = 6.0;
      task.w_speed = 1.0;
      task.w_path = 4.0;
      task.w_heading = 20.0;
      spec.start = {-40.0, 0.0, 0.0};
      spec.duration = 40.0;
      spec.end_distance = 75.0;
      spec.laps = 0.0;
      break;
  }
  return spec;
}

void write_log(std::ostream& out, const TrajectoryLog& log) {
  out << kLogHeader << '\n';
  std::string line;
  for (const LogRow& r : log.rows) {
    line.clear();
    for (double v : {r.t, r.x, r.y, r.psi, r.v_cmd, r.kappa_cmd, r.v_actual, r.roll, r.pitch, r.rr,
                     r.tau_ditch, r.throttle, r.brake, r.steer}) {
      if (!line.empty()) line += ',';
      line += format_double(v);
    }
    out << line << '\n';
  }
}

void write_log_file(const std::string& path, const TrajectoryLog& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_log(out, log);
  if (!out) throw IoError("write to '" + path + "' failed");
}

TrajectoryLog read_log(std::istream& in) {
  std::string line;
  int line_no = 1;
  if (!std::getline(in, line)) throw ParseError("empty log", line_no);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kLogHeader) throw ParseError("unexpected header", line_no);
  TrajectoryLog log;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double f[14];
    std::size_t field = 0;
    std::size_t pos = 0;
    while (true) {
      const std::size_t comma = line.find(',', pos);
      const std::string_view tok =
          std::string_view(line).substr(pos, comma == std::string::npos ? comma : comma - pos);
      if (field >= 14) throw ParseError("too many fields", line_no);
      const auto v = parse_number<double>(tok);
      if (!v || !std::isfinite(*v)) throw ParseError("bad number '" + std::string(tok) + "'", line_no);
      f[field++] = *v;
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (field != 14) {
      throw ParseError("expected 14 fields, got " + std::to_string(field), line_no);
    }
    if (!log.rows.empty() && !(f[0] > log.rows.back().t)) {
      throw ParseError("time is not increasing", line_no);
    }
    log.rows.push_back({f[0], f[1], f[2], f[3], f[4], f[5], f[6], f[7], f[8], f[9], f[10], f[11],
                        f[12], f[13]});
  }
  return log;
}

TrajectoryLog read_log_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return read_log(in);
}

void write_metrics(std::ostream& out, const MetricsReport& m) {
  auto d = [&](const char* key, double v) { out << key << '=' << format_double(v) << '\n'; };
  auto i = [&](const char* key, std::int64_t v) { out << key << '=' << v << '\n'; };
  out << "task=" << m.task << '\n';
  out << "status=" << m.status << '\n';
  out << "detail=" << m.detail << '\n';
  i("steps", m.steps);
  i("planner_steps", m.planner_steps);
  d("sim_time", m.sim_time);
  d("laps", m.laps);
  d("avg_speed", m.avg_speed);
  d("avg_lap_speed", m.avg_lap_speed);
  d("steady_speed", m.steady_speed);
  d("max_speed", m.max_speed);
  d("max_rr", m.max_rr);
  d("rr_max", m.rr_max);
  d("frac_rr_above_max", m.frac_rr_above_max);
  d("frac_rr_above_tol", m.frac_rr_above_tol);
  i("rr_hard_violations", m.rr_hard_violations);
  d("rr_hard_limit", m.rr_hard_limit);
  i("tau_violations", m.tau_violations);
  i("tau_above_max", m.tau_above_max);
  i("tau_below_min", m.tau_below_min);
  d("tau_min_seen", m.tau_min_seen);
  d("tau_max_seen", m.tau_max_seen);
  d("on_camber_max_speed", m.on_camber_max_speed);
  d("off_camber_max_speed", m.off_camber_max_speed);
  d("v_cmd_peak_before_ditch", m.v_cmd_peak_before_ditch);
  d("v_cmd_at_ditch_entry", m.v_cmd_at_ditch_entry);
  d("v_cmd_dip", m.v_cmd_dip);
  d("max_projection_error", m.max_projection_error);
}

void write_metrics_file(const std::string& path, const MetricsReport& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_metrics(out, m);
  if (!out) throw IoError("write to '" + path + "' failed");
}

void summarize_log(const TrajectoryLog& log, const TaskSpec& spec, MetricsReport& m) {
  const auto& rows = log.rows;
  const std::size_t n = rows.size();
  const ConstraintParams& cp = spec.planner.constraints;
  m.task = to_string(spec.kind);
  m.steps = static_cast<std::int64_t>(n);
  m.rr_max = cp.rr_max;
  m.rr_hard_limit = spec.planner.vehicle.rr_hard_limit();
  if (n == 0) return;
  m.sim_time = rows.back().t + spec.plant.dt;

  double sum_v = 0.0;
  double sum_late = 0.0;
  std::size_t above = 0;
  std::size_t above_tol = 0;
  m.max_rr = 0.0;
  m.max_speed = 0.0;
  m.tau_min_seen = std::numeric_limits<double>::infinity();
  m.tau_max_seen = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < n; ++k) {
    const LogRow& r = rows[k];
    sum_v += r.v_actual;
    if (2 * k >= n) sum_late += r.v_actual;
    m.max_speed = std::max(m.max_speed, r.v_actual);
    m.max_rr = std::max(m.max_rr, r.rr);
    if (r.rr > cp.rr_max) ++above;
    if (r.rr > 1.05 * cp.rr_max) ++above_tol;
    if (r.rr > m.rr_hard_limit) ++m.rr_hard_violations;
    m.tau_min_seen = std::min(m.tau_min_seen, r.tau_ditch);
    m.tau_max_seen = std::max(m.tau_max_seen, r.tau_ditch);
    if (r.tau_ditch > cp.tau_max) ++m.tau_above_max;
    if (r.tau_ditch < cp.tau_min) ++m.tau_below_min;
  }
  m.tau_violations = m.tau_above_max + m.tau_below_min;
  m.avg_speed = sum_v / static_cast<double>(n);
  m.steady_speed = sum_late / static_cast<double>(n - n / 2);
  m.frac_rr_above_max = static_cast<double>(above) / static_cast<double>(n);
  m.frac_rr_above_tol = static_cast<double>(above_tol) / static_cast<double>(n);

  if (spec.planner.task.path == PathKind::circle) {
    // Average over whole laps after the first one.
    Progress prog{spec.planner.task.center_x, spec.planner.task.center_y};
    std::vector<double> laps_at(n);
    for (std::size_t k = 0; k < n; ++k) {
      prog.add(rows[k].x, rows[k].y);
      laps_at[k] = prog.laps();
    }
    m.laps = prog.laps();
    const double last_full = std::floor(m.laps);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 0; k < n; ++k) {
      const bool in_window = last_full >= 2.0 ? (laps_at[k] >= 1.0 && laps_at[k] < last_full)
                                              : (m.laps < 1.0 || laps_at[k] >= 1.0);
      if (in_window) {
        sum += rows[k].v_actual;
        ++count;
      }
    }
    m.avg_lap_speed = count ? sum / static_cast<double>(count) : m.avg_speed;
  }

  if (spec.terrain.kind == TerrainKind::incline) {
    const double downhill = spec.terrain.azimuth_deg * kDeg + kPi;
    for (const LogRow& r : rows) {
      if (std::abs(wrap_angle(r.psi + kPi / 2.0 - downhill)) <= kPi / 4.0) {
        m.on_camber_max_speed = std::max(m.on_camber_max_speed, r.v_actual);
      }
      if (std::abs(wrap_angle(r.psi - kPi / 2.0 - downhill)) <= kPi / 4.0) {
        m.off_camber_max_speed = std::max(m.off_camber_max_speed, r.v_actual);
      }
    }
  }

  if (spec.terrain.kind == TerrainKind::v_ditch) {
    // Entry is when the front axle reaches the ditch edge.
    const double nx = -std::sin(spec.terrain.axis_azimuth_deg * kDeg);
    const double ny = std::cos(spec.terrain.axis_azimuth_deg * kDeg);
    const double reach = spec.terrain.half_width + 0.5 * spec.plant.wheelbase;
    double peak = 0.0;
    for (const LogRow& r : rows) {
      const double d =
          std::abs((r.x - spec.terrain.center_x) * nx + (r.y - spec.terrain.center_y) * ny);
      if (d <= reach) {
        m.v_cmd_peak_before_ditch = peak;
        m.v_cmd_at_ditch_entry = r.v_cmd;
        m.v_cmd_dip = peak - r.v_cmd;
        break;
      }
      peak = std::max(peak, r.v_cmd);
    }
  }
}

void apply_ground_truth(TrajectoryLog& log, const ElevationMap& map, const TaskSpec& spec) {
  std::vector<TrackSample> track;
  track.reserve(log.rows.size());
  for (const LogRow& r : log.rows) track.push_back({r.x, r.y, r.psi, r.v_actual});
  const GroundTruth gt =
      ground_truth_diagnostics(track, map, spec.planner.vehicle, footprint_of(spec.plant),
                               spec.plant.dt, spec.plant.substeps(spec.planner.mppi.dt));
  for (std::size_t k = 0; k < log.rows.size(); ++k) {
    LogRow& r = log.rows[k];
    r.roll = gt.roll[k];
    r.pitch = gt.pitch[k];
    r.rr = gt.rr[k];
    r.tau_ditch = gt.tau[k];
  }
}

TaskResult run_task(const TaskSpec& spec) {
  spec.validate();
  return run_task(spec, generate_terrain(spec.terrain));
}

TaskResult run_task(const TaskSpec& spec, const ElevationMap& map) {
  spec.validate();
  PlannerSettings settings = spec.planner;
  settings.footprint = footprint_of(spec.plant);
  Planner planner(settings, spec.threads);

  const double planner_dt = settings.mppi.dt;
  const double dt = spec.plant.dt;
  const int substeps = spec.plant.substeps(planner_dt);
  const bool ideal = spec.plant.model == PlantModel::ideal_kinematic;

  const Control initial{spec.initial_speed, 0.0};
  PlantState st;
  st.pose = spec.start;
  st.v = spec.initial_speed;
  st.pending.assign(static_cast<std::size_t>(spec.plant.delay), initial);
  planner.set_last_command(initial);
  planner.set_nominal(
      {std::vector<Control>(static_cast<std::size_t>(settings.mppi.horizon), initial)});

  TaskResult result;
  MetricsReport& m = result.metrics;
  std::vector<PlanarState> tick_pose;
  std::vector<PlanarState> projected;
  Progress prog{settings.task.center_x, settings.task.center_y};
  prog.add(st.pose.x, st.pose.y);
  const double start_along = along_path(settings.task, st.pose.x, st.pose.y);

  std::int64_t plant_steps = 0;
  const auto max_steps = static_cast<std::int64_t>(std::llround(spec.duration / dt));
  bool stop = false;
  while (!stop && plant_steps < max_steps) {
    if (is_circle(spec.kind) && spec.laps > 0.0 && prog.laps() >= spec.laps) break;
    if (!is_circle(spec.kind) && spec.end_distance > 0.0 &&
        along_path(settings.task, st.pose.x, st.pose.y) - start_along >= spec.end_distance) {
      break;
    }

    DelayConfig delay{std::vector<Control>(st.pending.begin(), st.pending.end())};
    PlanResult plan;
    try {
      plan = planner.plan_step(st.pose, delay, map);
    } catch (const DegenerateBatch& e) {
      m.status = "planner_failure";
      m.detail = e.what();
      break;
    }
    tick_pose.push_back(st.pose);
    projected.push_back(plan.diagnostics.projected);
    st.pending.push_back(plan.command);
    const Control active = st.pending.front();
    st.pending.pop_front();

    for (int s = 0; s < substeps && plant_steps < max_steps; ++s) {
      const AttitudeSample att =
          sample_attitude(map, st.pose.x, st.pose.y, st.pose.psi, settings.footprint);
      if (att.status != AttitudeSample::Status::ok) {
        m.status = "out_of_bounds";
        m.detail = "vehicle footprint left the map at (" + format_double(st.pose.x) + ", " +
                   format_double(st.pose.y) + ")";
        stop = true;
        break;
      }
      LogRow row{};
      row.t = static_cast<double>(plant_steps) * dt;
      row.x = st.pose.x;
      row.y = st.pose.y;
      row.psi = st.pose.psi;
      row.v_cmd = active.v;
      row.kappa_cmd = active.kappa;
      row.v_actual = st.v;
      row.steer = curvature_to_steering(active.kappa, spec.plant.wheelbase,
                                        spec.actuators.max_steer);
      if (ideal) {
        st = step_plant_ideal(st, active, map, spec.plant, dt);
      } else {
        const SpeedControlResult sc =
            speed_control(st.v, active.v, att.attitude.pitch, spec.gains, st.controller, dt);
        ActuatorCommand cmd = actuator_map(sc.effort, spec.actuators);
        cmd.steer = row.steer;
        row.throttle = cmd.throttle;
        row.brake = cmd.brake;
        st = step_plant(st, cmd, map, spec.plant, dt);
        st.controller = sc.state;
      }
      result.log.rows.push_back(row);
      ++plant_steps;
      prog.add(st.pose.x, st.pose.y);
    }
  }
  m.planner_steps = static_cast<std::int64_t>(tick_pose.size());

  apply_ground_truth(result.log, map, spec);

  const auto tau_steps = static_cast<std::size_t>(spec.plant.delay);
  for (std::size_t k = 0; k + tau_steps < tick_pose.size(); ++k) {
    const PlanarState& a = projected[k];
    const PlanarState& b = tick_pose[k + tau_steps];
    m.max_projection_error = std::max(m.max_projection_error, std::hypot(a.x - b.x, a.y - b.y));
  }

  summarize_log(result.log, spec, m);
  if (m.status == "ok" && m.rr_hard_violations > 0) {
    m.status = "rollover_risk_failure";
    m.detail = "ground-truth RR exceeded g*P2/P3";
  }
  return result;
}

}  // namespace terra
