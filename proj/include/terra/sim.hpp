#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "terra/constraints.hpp"
#include "terra/kinematics.hpp"
#include "terra/lowlevel.hpp"
#include "terra/mppi.hpp"
#include "terra/terrain.hpp"

namespace terra {

enum class PlantModel : std::uint8_t {
  dynamic,          ///< first-order longitudinal model driven by throttle/brake
  ideal_kinematic,  ///< executes (v, kappa) exactly with the planner's model
};

std::string to_string(PlantModel model);
PlantModel plant_model_from_string(const std::string& name);

struct PlantParams {
  double wheelbase = 2.5;
  double track_width = 1.6;
  double drive_gain = 4.0;  ///< m/s^2 at full throttle
  double brake_gain = 4.0;  ///< m/s^2 at full brake
  double drag = 0.05;       ///< 1/s
  double dt = 0.02;
  int delay = 2;  ///< planner steps between issuing and executing a command
  double g = 9.81;
  PlantModel model = PlantModel::dynamic;

  /// Substeps per planner step; throws ConfigError unless dt divides planner_dt.
  int substeps(double planner_dt) const;
  void validate(double planner_dt) const;
};

struct PlantState {
  PlanarState pose;
  double v = 0.0;
  ControllerState controller;
  std::deque<Control> pending;  ///< issued commands not yet active, oldest first
};

/// One Euler step of the ground-following plant. Pose advances with the
/// speed held at the start of the step; v is clamped at zero.
/// Throws OutOfBounds when the footprint is not fully on the map.
PlantState step_plant(const PlantState& state, const ActuatorCommand& command,
                      const ElevationMap& map, const PlantParams& params, double dt);

/// Ideal plant: executes the control exactly with the planner's kinematics.
PlantState step_plant_ideal(const PlantState& state, const Control& u, const ElevationMap& map,
                            const PlantParams& params, double dt);

struct TrackSample {
  double x;
  double y;
  double psi;
  double v;
};

struct GroundTruth {
  std::vector<double> roll;
  std::vector<double> pitch;
  std::vector<double> kappa;  ///< executed, from heading differencing
  std::vector<double> rr;
  std::vector<double> tau;
};

/// Recomputes attitude, executed curvature, rollover risk and ditch torque
/// along an executed track. Pitch rates are differenced `stride` samples
/// apart (one planner interval) so they live on the same time scale the
/// planner scores.
GroundTruth ground_truth_diagnostics(std::span<const TrackSample> track, const ElevationMap& map,
                                     const VehicleParams& vehicle, const WheelFootprint& footprint,
                                     double sample_dt, int stride);

enum class TaskKind : std::uint8_t { hill_circle, flat_circle, ditch_cross, slalom };

std::string to_string(TaskKind kind);
TaskKind task_kind_from_string(const std::string& name);

struct TaskSpec {
  TaskKind kind = TaskKind::hill_circle;
  TerrainSpec terrain;
  PlannerSettings planner;
  ControllerGains gains;
  ActuatorMap actuators;
  PlantParams plant;
  double duration = 150.0;      ///< seconds of simulated time, upper bound
  double laps = 6.0;            ///< circle tasks stop after this many laps (0: run to duration)
  double end_distance = 0.0;    ///< line tasks stop after this distance along the path
  PlanarState start;
  double initial_speed = 0.0;
  int threads = 0;

  void validate() const;
};

/// Default scenario for each task kind.
TaskSpec make_task(TaskKind kind);

struct LogRow {
  double t;
  double x;
  double y;
  double psi;
  double v_cmd;
  double kappa_cmd;
  double v_actual;
  double roll;
  double pitch;
  double rr;
  double tau_ditch;
  double throttle;
  double brake;
  double steer;
};

struct TrajectoryLog {
  std::vector<LogRow> rows;
};

inline constexpr const char* kLogHeader =
    "t,x,y,psi,v_cmd,kappa_cmd,v_actual,roll,pitch,rr,tau_ditch,throttle,brake,steer";

void write_log(std::ostream& out, const TrajectoryLog& log);
void write_log_file(const std::string& path, const TrajectoryLog& log);
/// Throws ParseError with the offending line number.
TrajectoryLog read_log(std::istream& in);
TrajectoryLog read_log_file(const std::string& path);

struct MetricsReport {
  std::string task;
  std::string status = "ok";
  std::string detail;
  std::int64_t steps = 0;
  double sim_time = 0.0;
  double laps = 0.0;
  double avg_speed = 0.0;
  double avg_lap_speed = 0.0;
  double steady_speed = 0.0;  ///< mean speed over the second half of the run
  double max_speed = 0.0;
  double max_rr = 0.0;
  double rr_max = 0.0;
  double frac_rr_above_max = 0.0;
  double frac_rr_above_tol = 0.0;  ///< fraction above 1.05 rr_max
  std::int64_t rr_hard_violations = 0;
  double rr_hard_limit = 0.0;
  std::int64_t tau_violations = 0;
  std::int64_t tau_above_max = 0;
  std::int64_t tau_below_min = 0;
  double tau_min_seen = 0.0;
  double tau_max_seen = 0.0;
  double on_camber_max_speed = 0.0;
  double off_camber_max_speed = 0.0;
  double v_cmd_peak_before_ditch = 0.0;
  double v_cmd_at_ditch_entry = 0.0;
  double v_cmd_dip = 0.0;
  double max_projection_error = 0.0;
  std::int64_t planner_steps = 0;

  bool failed() const noexcept { return status != "ok"; }
};

void write_metrics(std::ostream& out, const MetricsReport& m);
void write_metrics_file(const std::string& path, const MetricsReport& m);

struct TaskResult {
  TrajectoryLog log;
  MetricsReport metrics;
};

/// Runs the task on terrain generated from spec.terrain.
TaskResult run_task(const TaskSpec& spec);
/// Runs the task on a supplied map; spec.terrain is ignored.
TaskResult run_task(const TaskSpec& spec, const ElevationMap& map);

/// Recomputes roll, pitch, rr and tau_ditch of every row from the executed
/// track alone (x, y, psi, v_actual).
void apply_ground_truth(TrajectoryLog& log, const ElevationMap& map, const TaskSpec& spec);

/// Fills metrics that depend only on the log rows and the task geometry.
void summarize_log(const TrajectoryLog& log, const TaskSpec& spec, MetricsReport& m);

}  // namespace terra
