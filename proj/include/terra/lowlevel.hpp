#pragma once

namespace terra {

/// PI speed loop with slope and drag feedforward.
///
/// u = -K_P e - K_I integral(e) + c1 g sin(pitch) + c2 v, e = v - v_des.
/// Pitch > 0 means gravity pulls forward, so c1 < 0 makes the feedforward
/// oppose gravity along the heading.
struct ControllerGains {
  double k_p = 0.8;
  double k_i = 0.4;
  double c1 = -1.0;
  double c2 = 0.05;
  double integral_limit = 10.0;  ///< k_i * limit equals the throttle scale
  double g = 9.81;

  void validate() const;
};

struct ControllerState {
  double integral = 0.0;
};

struct ActuatorCommand {
  double throttle = 0.0;
  double brake = 0.0;
  double steer = 0.0;  ///< front wheel angle, rad
};

struct ActuatorMap {
  double throttle_scale = 4.0;  ///< effort giving full throttle
  double brake_scale = 4.0;     ///< effort magnitude giving full brake
  double max_steer = 0.6108652381980153;  ///< 35 degrees

  void validate() const;
};

struct SpeedControlResult {
  double effort;
  ControllerState state;
};

SpeedControlResult speed_control(double v, double v_des, double pitch, const ControllerGains& gains,
                                 const ControllerState& state, double dt);

/// Throttle for positive effort, brake for negative; never both.
ActuatorCommand actuator_map(double effort, const ActuatorMap& map) noexcept;

/// Kinematic-bicycle steering angle for a curvature, clipped to max_steer.
double curvature_to_steering(double kappa, double wheelbase, double max_steer) noexcept;

}  // namespace terra
