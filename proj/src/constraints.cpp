#include "terra/constraints.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "terra/error.hpp"

namespace terra {

namespace {

constexpr double kHalfPi = 0.5 * std::numbers::pi;

void check_roll(double roll) {
  if (!(std::abs(roll) < kHalfPi)) throw SteepRoll("|roll| must be below pi/2");
}

void check_trace(const AttitudeTrace& t) {
  const std::size_t n = t.roll.size();
  if (t.pitch.size() != n || t.v.size() != n || t.kappa.size() != n) {
    throw InvalidSpec("attitude trace has inconsistent lengths");
  }
}

void check_rates(const AttitudeTrace& t) {
  check_trace(t);
  if (t.omega2.size() != t.size() || t.alpha2.size() != t.size()) {
    throw InvalidSpec("attitude trace is missing pitch rates");
  }
}

// Gravity in body coordinates under the roll/pitch convention.
Eigen::Vector3d body_gravity(double roll, double pitch, double g) {
  return {g * std::sin(pitch), g * std::cos(pitch) * std::sin(roll),
          -g * std::cos(pitch) * std::cos(roll)};
}

}  // namespace

void VehicleParams::validate() const {
  if (!(p1 > 0.0 && p2 > 0.0 && p3 > 0.0 && g > 0.0)) {
    throw ConfigError("vehicle p1, p2, p3 and g must be > 0");
  }
  if (!(i22 >= 0.0)) throw ConfigError("vehicle i22 must be >= 0");
  if (!(mass > 0.0)) throw ConfigError("vehicle mass must be > 0");
}

void ConstraintParams::validate(const VehicleParams& vehicle) const {
  if (!(rr_max > 0.0)) throw ConfigError("rr_max must be > 0");
  if (rr_max > vehicle.rr_hard_limit()) {
    throw ConfigError("rr_max exceeds the static limit g * p2 / p3");
  }
  if (!(tau_min < tau_max && tau_max < 0.0)) {
    throw ConfigError("torque band must satisfy tau_min < tau_max < 0");
  }
  if (!(w1 >= 0.0 && w2 >= 0.0 && w3 >= 0.0)) throw ConfigError("cost weights must be >= 0");
}

double rollover_risk(double v, double kappa, double roll, double g) {
  check_roll(roll);
  return rollover_risk_unchecked(v, kappa, std::sin(roll), std::cos(roll), g);
}

std::vector<double> rollover_cost(const AttitudeTrace& trace, const ConstraintParams& params,
                                  double g) {
  check_trace(trace);
  std::vector<double> cost(trace.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double rr = rollover_risk(trace.v[k], trace.kappa[k], trace.roll[k], g);
    if (rr > params.rr_max) acc += rr;
    cost[k] = acc;
  }
  return cost;
}

std::array<double, 3> residual_torque_wheel_line(double v, double kappa, double roll, double pitch,
                                                 double vdot, const VehicleParams& params,
                                                 Side side) {
  const Eigen::Vector3d b1 = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d gravity = body_gravity(roll, pitch, params.g);
  const Eigen::Vector3d omega(0.0, 0.0, v * kappa);
  // Path-frame decomposition of the inertial acceleration.
  const Eigen::Vector3d accel = vdot * b1 + v * omega.cross(b1);
  // The center of mass sits inboard of the chosen wheel line.
  const double lateral = side == Side::left ? -params.p2 : params.p2;
  const Eigen::Vector3d r(0.0, lateral, params.p3);
  const Eigen::Vector3d tau = -r.cross(gravity - accel);
  return {tau.x(), tau.y(), tau.z()};
}

double rollover_margin_3d(double v, double kappa, double roll, double pitch, double vdot,
                          const VehicleParams& params, Side side) {
  check_roll(roll);
  const double tau_b1 = residual_torque_wheel_line(v, kappa, roll, pitch, vdot, params, side)[0];
  return side == Side::left ? tau_b1 : -tau_b1;
}

double rollover_scalar_margin(double v, double kappa, double roll, const VehicleParams& p) {
  check_roll(roll);
  return std::abs(p.p3 * (v * v * kappa - p.g * std::sin(roll))) - p.p2 * p.g * std::cos(roll);
}

void pitch_rates_into(std::span<const double> pitch, double dt, std::span<double> omega2,
                      std::span<double> alpha2) noexcept {
  const std::size_t n = pitch.size();
  for (std::size_t k = 0; k + 1 < n; ++k) omega2[k] = (pitch[k + 1] - pitch[k]) / dt;
  omega2[n - 1] = omega2[n - 2];
  for (std::size_t k = 0; k + 1 < n; ++k) alpha2[k] = (omega2[k + 1] - omega2[k]) / dt;
  alpha2[n - 1] = alpha2[n - 2];
}

PitchRates pitch_rates(std::span<const double> pitch, double dt) {
  if (pitch.size() < 3) throw TooShort("pitch_rates needs at least 3 samples");
  if (!(dt > 0.0)) throw InvalidSpec("pitch_rates needs dt > 0");
  PitchRates r{std::vector<double>(pitch.size()), std::vector<double>(pitch.size())};
  pitch_rates_into(pitch, dt, r.omega2, r.alpha2);
  return r;
}

double ditch_torque(double v, double pitch, double omega2, double alpha2,
                    const VehicleParams& params) {
  return ditch_torque_trig(v, omega2, alpha2, std::sin(pitch), std::cos(pitch), params);
}

double ditch_torque(const AttitudeTrace& trace, const VehicleParams& params, std::size_t k) {
  check_rates(trace);
  return ditch_torque(trace.v.at(k), trace.pitch[k], trace.omega2[k], trace.alpha2[k], params);
}

double ditch_torque_closed_form(double v, double vdot, double pitch, double omega2, double alpha2,
                        const VehicleParams& p) {
  return p.i22 * alpha2 + p.p1 * (v * omega2 + p.g * std::cos(pitch)) +
         p.p3 * (vdot + p.g * std::sin(pitch));
}

double ditch_torque_3d(double v, double vdot, double pitch, double omega2, double alpha2,
                       const VehicleParams& p) {
  const Eigen::Vector3d b1 = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d b2 = Eigen::Vector3d::UnitY();
  const Eigen::Vector3d gravity = body_gravity(0.0, pitch, p.g);
  const Eigen::Vector3d omega = omega2 * b2;
  const Eigen::Vector3d accel = vdot * b1 + v * omega.cross(b1);
  const Eigen::Vector3d r(p.p1, 0.0, p.p3);
  const Eigen::Vector3d inertial = p.i22 * alpha2 * b2;
  const Eigen::Vector3d tau = inertial - r.cross(gravity - accel);
  return tau.dot(b2);
}

std::vector<double> airtime_cost(const AttitudeTrace& trace, const VehicleParams& vehicle,
                                 const ConstraintParams& params) {
  check_rates(trace);
  std::vector<double> cost(trace.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double excess = ditch_torque(trace, vehicle, k) - params.tau_max;
    if (excess > 0.0) acc += excess;
    cost[k] = acc;
  }
  return cost;
}

std::vector<double> bump_cost(const AttitudeTrace& trace, const VehicleParams& vehicle,
                              const ConstraintParams& params) {
  check_rates(trace);
  std::vector<double> cost(trace.size());
  double acc = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double excess = params.tau_min - ditch_torque(trace, vehicle, k);
    if (excess > 0.0) acc += excess;
    cost[k] = acc;
  }
  return cost;
}

}  // namespace terra
