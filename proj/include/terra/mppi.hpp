#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "terra/constraints.hpp"
#include "terra/kinematics.hpp"
#include "terra/terrain.hpp"

namespace terra {

class ThreadPool;

enum class RolloverCostMode : std::uint8_t {
  physics,     ///< rollover-risk violations
  roll_angle,  ///< baseline: roll angle above a fixed threshold
};

std::string to_string(RolloverCostMode mode);
RolloverCostMode rollover_cost_mode_from_string(const std::string& name);

/// Sampler and optimizer settings.
///
/// Sample families are laid out in index order: conventional, narrow,
/// scaled, reset. Reset samples cycle through the means (0, 0),
/// (0, -kappa_reset), (0, +kappa_reset).
struct MppiConfig {
  int horizon = 50;
  int n_conv = 640;
  int n_narrow = 192;
  int n_scaled = 160;
  int n_reset = 32;
  double sigma_v = 0.6;       ///< velocity noise std-dev per step (m/s)
  double sigma_kappa = 0.03;  ///< curvature noise std-dev per step (1/m)
  double narrow_scale = 0.25;  ///< covariance multiplier for narrow samples
  double speed_scale = 0.5;    ///< velocity multiplier on the scaled mean
  double kappa_reset = 0.2;
  double lambda = 1.0;
  double dt = 0.1;
  std::uint64_t seed = 0;
  RolloverCostMode rollover_mode = RolloverCostMode::physics;
  double roll_threshold = 0.3490658503988659;  ///< 20 degrees
  double out_of_map_penalty = 1e6;
  /// Sampling phases per step for the ditch terms. 1 scores the rollout
  /// states only; P > 1 also scores the path offset by m/P of a step and
  /// keeps the worst excess per step.
  int ditch_phases = 1;
  /// Tightens the scored ditch band on both sides (mass-specific torque).
  double ditch_margin = 0.0;

  int samples() const noexcept { return n_conv + n_narrow + n_scaled + n_reset; }
  void validate() const;
};

enum class PathKind : std::uint8_t { none, circle, line, sine };

std::string to_string(PathKind kind);
PathKind path_kind_from_string(const std::string& name);

/// Task cost added to the constraint costs so closed-loop tasks have a goal:
/// speed tracking plus lateral/heading tracking of a reference path.
struct TaskCost {
  double target_speed = 0.0;
  double w_speed = 0.0;
  PathKind path = PathKind::none;
  double w_path = 0.0;
  double w_heading = 0.0;

  // circle: centre, radius, +1 counter-clockwise / -1 clockwise
  double center_x = 0.0;
  double center_y = 0.0;
  double radius = 15.0;
  int direction = 1;

  // line (and sine axis): anchor point and heading
  double line_x = 0.0;
  double line_y = 0.0;
  double line_heading = 0.0;

  // sine: lateral offset amplitude * sin(2 pi s / wavelength) along the line
  double sine_amplitude = 0.0;
  double sine_wavelength = 30.0;

  /// Signed lateral error and reference heading at a pose.
  struct PathError {
    double lateral;
    double heading;
  };
  PathError path_error(const PlanarState& s) const noexcept;

  /// Per-step task cost; `s` is the state reached by applying `u`.
  double step_cost(const PlanarState& s, const Control& u) const noexcept;
};

struct PlannerSettings {
  MppiConfig mppi;
  FeasibilityLimits limits;
  VehicleParams vehicle;
  ConstraintParams constraints;
  WheelFootprint footprint;
  TaskCost task;

  void validate() const;
};

struct NominalSequence {
  std::vector<Control> controls;
};

enum class SampleFamily : std::uint8_t { conventional, narrow, scaled, reset };

std::string to_string(SampleFamily family);

/// One optimizer iteration's worth of samples, stored row-major per sample.
struct SampleBatch {
  int n = 0;
  int horizon = 0;
  std::vector<SampleFamily> family;
  std::vector<Control> raw;            ///< n * horizon
  std::vector<Control> processed;      ///< n * horizon
  std::vector<PlanarState> rollouts;   ///< n * (horizon + 1)
  std::vector<double> roll;            ///< n * horizon
  std::vector<double> pitch;           ///< n * horizon
  std::vector<double> rr;              ///< n * horizon
  std::vector<double> tau;             ///< n * horizon
  std::vector<double> rollover_cost;   ///< n, final cumulative value
  std::vector<double> airtime_cost;    ///< n
  std::vector<double> bump_cost;       ///< n
  std::vector<double> task_cost;       ///< n
  std::vector<double> cost;            ///< n, weighted total
  std::vector<std::uint8_t> off_map;   ///< n

  void resize(int samples, int horizon_steps);

  std::span<const Control> raw_row(int i) const;
  std::span<const Control> processed_row(int i) const;
  std::span<const PlanarState> rollout_row(int i) const;
  std::span<const double> rr_row(int i) const;
  std::span<const double> tau_row(int i) const;
};

/// Draws raw control sequences around `nominal`. Deterministic in
/// (config.seed, iteration); independent of thread count.
void sample_raw(const NominalSequence& nominal, const MppiConfig& config, std::uint64_t iteration,
                SampleBatch& batch);

/// Processes, rolls out and scores every sample. `start` must already be
/// the delay-projected state; `prev` is the last issued command.
void evaluate_batch(SampleBatch& batch, const PlanarState& start, const Control& prev,
                    const ElevationMap& map, const PlannerSettings& settings,
                    ThreadPool* pool = nullptr);

struct UpdateResult {
  Control command;
  NominalSequence nominal;
  std::vector<double> weights;
};

/// Exponentially weighted average of the processed samples, re-processed
/// through the feasibility filter. Throws DegenerateBatch when no cost is
/// finite.
UpdateResult mppi_update(const SampleBatch& batch, double lambda, const Control& prev,
                         const FeasibilityLimits& limits);

/// Normalized min-shifted softmax weights of `costs` at temperature lambda.
std::vector<double> mppi_weights(std::span<const double> costs, double lambda);

NominalSequence shift(const NominalSequence& nominal);

struct PlanDiagnostics {
  PlanarState projected;
  std::array<double, 4> family_best_cost{};
  double min_cost = 0.0;
  double mean_cost = 0.0;
  double effective_samples = 0.0;
  int best_index = -1;
  SampleFamily best_family = SampleFamily::conventional;
  std::vector<double> best_rr;
  std::vector<double> best_tau;
  std::vector<PlanarState> best_rollout;
};

struct PlanResult {
  Control command;
  NominalSequence nominal;  ///< already shifted for the next call
  PlanDiagnostics diagnostics;
};

/// Receding-horizon MPPI planner. One caller at a time.
class Planner {
 public:
  explicit Planner(PlannerSettings settings, int threads = 0);
  ~Planner();

  Planner(const Planner&) = delete;
  Planner& operator=(const Planner&) = delete;

  PlanResult plan_step(const PlanarState& measured, const DelayConfig& delay,
                       const ElevationMap& map);

  const PlannerSettings& settings() const noexcept { return settings_; }
  const NominalSequence& nominal() const noexcept { return nominal_; }
  void set_nominal(NominalSequence nominal);
  const Control& last_command() const noexcept { return last_command_; }
  void set_last_command(const Control& u) noexcept { last_command_ = u; }
  const SampleBatch& batch() const noexcept { return batch_; }
  std::uint64_t iteration() const noexcept { return iteration_; }
  int threads() const noexcept;

 private:
  PlannerSettings settings_;
  std::unique_ptr<ThreadPool> pool_;
  NominalSequence nominal_;
  Control last_command_;
  SampleBatch batch_;
  std::uint64_t iteration_ = 0;
};

}  // namespace terra
