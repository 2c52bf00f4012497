#include "terra/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "terra/error.hpp"

namespace terra {

namespace {

// clip(a, b +/- c) = max(min(a, b + c), b - c)
inline double clip_around(double a, double b, double c) noexcept {
  return std::max(std::min(a, b + c), b - c);
}

}  // namespace

void FeasibilityLimits::validate() const {
  if (!(dv_max > 0.0 && dkappa_max > 0.0 && v_min > 0.0 && kappa_max > 0.0 && v_cap > 0.0)) {
    throw ConfigError("feasibility limits must be strictly positive");
  }
  if (!(v_floor >= -v_cap && v_floor < v_cap)) {
    throw ConfigError("v_floor must lie in [-v_cap, v_cap)");
  }
}

double wrap_angle(double a) noexcept {
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  a = std::remainder(a, kTwoPi);
  if (a <= -std::numbers::pi) a += kTwoPi;
  return a;
}

PlanarState step(const PlanarState& state, const Control& u, double dt) noexcept {
  const double ds = u.v * dt;
  return {state.x + ds * std::cos(state.psi), state.y + ds * std::sin(state.psi),
          state.psi + ds * u.kappa};
}

void rollout_into(const PlanarState& start, std::span<const Control> controls, double dt,
                  std::span<PlanarState> out) noexcept {
  out[0] = start;
  for (std::size_t h = 0; h < controls.size(); ++h) {
    out[h + 1] = step(out[h], controls[h], dt);
  }
}

std::vector<PlanarState> rollout(const PlanarState& start, std::span<const Control> controls,
                                 double dt) {
  std::vector<PlanarState> states(controls.size() + 1);
  rollout_into(start, controls, dt, states);
  return states;
}

void process_feasible_into(std::span<const Control> raw, const Control& prev,
                           const FeasibilityLimits& limits, std::span<Control> out) noexcept {
  const double v_lo = std::max(-limits.v_cap, limits.v_floor);
  Control last = prev;
  for (std::size_t h = 0; h < raw.size(); ++h) {
    Control u;
    u.v = clip_around(raw[h].v, last.v, limits.dv_max);
    u.v = std::clamp(u.v, v_lo, limits.v_cap);
    if (std::abs(u.v) < limits.v_min) {
      u.kappa = last.kappa;
    } else {
      u.kappa = clip_around(raw[h].kappa, last.kappa, limits.dkappa_max);
      u.kappa = std::clamp(u.kappa, -limits.kappa_max, limits.kappa_max);
    }
    out[h] = u;
    last = u;
  }
}

std::vector<Control> process_feasible(std::span<const Control> raw, const Control& prev,
                                      const FeasibilityLimits& limits) {
  std::vector<Control> out(raw.size());
  process_feasible_into(raw, prev, limits, out);
  return out;
}

PlanarState project_state(const PlanarState& state, const DelayConfig& delay, double dt) {
  PlanarState s = state;
  for (const Control& u : delay.pending) s = step(s, u, dt);
  return s;
}

}  // namespace terra
