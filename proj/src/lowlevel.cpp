#include "terra/lowlevel.hpp"

#include <algorithm>
#include <cmath>

#include "terra/error.hpp"

namespace terra {

void ControllerGains::validate() const {
  if (!(k_p >= 0.0 && k_i >= 0.0)) throw ConfigError("controller gains must be >= 0");
  if (!(integral_limit > 0.0)) throw ConfigError("integral_limit must be > 0");
  if (!std::isfinite(c1) || !std::isfinite(c2) || !(g > 0.0)) {
    throw ConfigError("feedforward coefficients must be finite");
  }
}

void ActuatorMap::validate() const {
  if (!(throttle_scale > 0.0 && brake_scale > 0.0)) {
    throw ConfigError("actuator scales must be > 0");
  }
  if (!(max_steer > 0.0 && max_steer < 1.5707963267948966)) {
    throw ConfigError("max_steer must lie in (0, pi/2)");
  }
}

SpeedControlResult speed_control(double v, double v_des, double pitch, const ControllerGains& gains,
                                 const ControllerState& state, double dt) {
  if (!(dt > 0.0)) throw InvalidSpec("speed_control needs dt > 0");
  const double e = v - v_des;
  ControllerState next = state;
  next.integral = std::clamp(state.integral + e * dt, -gains.integral_limit, gains.integral_limit);
  const double u = -gains.k_p * e - gains.k_i * next.integral +
                   gains.c1 * gains.g * std::sin(pitch) + gains.c2 * v;
  return {u, next};
}

ActuatorCommand actuator_map(double effort, const ActuatorMap& map) noexcept {
  ActuatorCommand cmd;
  if (effort > 0.0) {
    cmd.throttle = std::min(effort / map.throttle_scale, 1.0);
  } else if (effort < 0.0) {
    cmd.brake = std::min(-effort / map.brake_scale, 1.0);
  }
  return cmd;
}

double curvature_to_steering(double kappa, double wheelbase, double max_steer) noexcept {
  return std::clamp(std::atan(wheelbase * kappa), -max_steer, max_steer);
}

}  // namespace terra
