#pragma once

#include <span>
#include <vector>

namespace terra {

/// Planar pose of the vehicle's center of mass.
struct PlanarState {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
};

/// Linear velocity (m/s) and steering curvature (1/m).
struct Control {
  double v = 0.0;
  double kappa = 0.0;

  friend bool operator==(const Control&, const Control&) = default;
};

/// Per-step feasibility bounds applied to sampled controls.
struct FeasibilityLimits {
  double dv_max = 0.3;       ///< max |dv| per planner step
  double dkappa_max = 0.02;  ///< max |dkappa| per planner step
  double v_min = 0.1;        ///< below this speed steering is frozen
  double kappa_max = 0.25;
  double v_cap = 12.0;
  double v_floor = 0.0;  ///< lower speed bound, >= -v_cap

  void validate() const;
};

/// Controls issued but not yet executed, oldest first.
struct DelayConfig {
  std::vector<Control> pending;

  int steps() const noexcept { return static_cast<int>(pending.size()); }
};

double wrap_angle(double a) noexcept;

/// Forward-Euler step of the curvature-unicycle model.
PlanarState step(const PlanarState& state, const Control& u, double dt) noexcept;

/// States 0..H for H controls; element 0 is `start`.
std::vector<PlanarState> rollout(const PlanarState& start, std::span<const Control> controls,
                                 double dt);
void rollout_into(const PlanarState& start, std::span<const Control> controls, double dt,
                  std::span<PlanarState> out) noexcept;

/// Rate-limits velocity and curvature step by step starting from `prev`,
/// freezing curvature whenever |v| < v_min.
std::vector<Control> process_feasible(std::span<const Control> raw, const Control& prev,
                                      const FeasibilityLimits& limits);
void process_feasible_into(std::span<const Control> raw, const Control& prev,
                           const FeasibilityLimits& limits, std::span<Control> out) noexcept;

/// Where the vehicle will be once every pending control has executed.
PlanarState project_state(const PlanarState& state, const DelayConfig& delay, double dt);

}  // namespace terra
