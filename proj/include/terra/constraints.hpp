#pragma once

#include <array>
#include <span>
#include <vector>

namespace terra {

/// Mass-normalized vehicle geometry.
///
/// p1: longitudinal distance from the rear-axle pivot to the center of mass.
/// p2: lateral distance from either wheel line to the center of mass.
/// p3: height of the center of mass above the pivots.
/// i22: pitch moment of inertia about b2 divided by mass.
struct VehicleParams {
  double mass = 900.0;
  double p1 = 1.1;
  double p2 = 0.8;
  double p3 = 0.9;
  double i22 = 2.0;
  double g = 9.81;

  /// Static rollover-risk limit g * p2 / p3.
  double rr_hard_limit() const noexcept { return g * p2 / p3; }

  void validate() const;
};

/// Bounds and weights of the traversability costs. Torques are mass-specific.
struct ConstraintParams {
  double rr_max = 3.4;
  double tau_min = -25.0;
  double tau_max = -2.0;
  double w1 = 10.0;
  double w2 = 10.0;
  double w3 = 10.0;

  void validate(const VehicleParams& vehicle) const;
};

/// Per-step attitude and control samples along one rollout.
struct AttitudeTrace {
  std::vector<double> roll;
  std::vector<double> pitch;
  std::vector<double> v;
  std::vector<double> kappa;
  std::vector<double> omega2;
  std::vector<double> alpha2;

  std::size_t size() const noexcept { return roll.size(); }
};

/// |v^2 kappa - g sin(roll)| / cos(roll). Throws SteepRoll for |roll| >= pi/2.
double rollover_risk(double v, double kappa, double roll, double g = 9.81);

/// Unchecked variant for hot loops; caller guarantees |roll| < pi/2.
inline double rollover_risk_unchecked(double v, double kappa, double sin_roll, double cos_roll,
                                      double g) noexcept {
  const double lateral = v * v * kappa - g * sin_roll;
  return (lateral < 0.0 ? -lateral : lateral) / cos_roll;
}

/// Cumulative sum of RR(k) over steps where RR(k) > rr_max.
std::vector<double> rollover_cost(const AttitudeTrace& trace, const ConstraintParams& params,
                                  double g = 9.81);

enum class Side { left, right };

/// Residual torque about the chosen wheel line, body components, per unit
/// mass, evaluated with full cross products (no scalar simplification).
/// Assumes zero roll acceleration and omega = v kappa b3.
std::array<double, 3> residual_torque_wheel_line(double v, double kappa, double roll, double pitch,
                                                 double vdot, const VehicleParams& params,
                                                 Side side);

/// Signed rollover margin from the vector model: negative when the wheels on
/// the far side still push up (tau_L . b1 for the left line, -tau_R . b1 for
/// the right line). Throws SteepRoll for |roll| >= pi/2.
double rollover_margin_3d(double v, double kappa, double roll, double pitch, double vdot,
                          const VehicleParams& params, Side side);

/// Scalar bound |p3 (v^2 kappa - g sin roll)| - p2 g cos roll; negative
/// means both wheel lines remain loaded.
double rollover_scalar_margin(double v, double kappa, double roll, const VehicleParams& params);

struct PitchRates {
  std::vector<double> omega2;
  std::vector<double> alpha2;
};

/// Forward differences of pitch; last entries repeat the last computable
/// value. Throws TooShort for fewer than 3 samples.
PitchRates pitch_rates(std::span<const double> pitch, double dt);
void pitch_rates_into(std::span<const double> pitch, double dt, std::span<double> omega2,
                      std::span<double> alpha2) noexcept;

/// Deployed ditch residual torque (mass-specific, vdot dropped).
inline double ditch_torque_trig(double v, double omega2, double alpha2, double sin_pitch,
                                double cos_pitch, const VehicleParams& p) noexcept {
  return p.i22 * alpha2 + p.p1 * v * omega2 - p.p3 * p.g * sin_pitch - p.p1 * p.g * cos_pitch;
}
double ditch_torque(double v, double pitch, double omega2, double alpha2,
                    const VehicleParams& params);
double ditch_torque(const AttitudeTrace& trace, const VehicleParams& params, std::size_t k);

/// Ditch torque in the closed form that keeps vdot, opposite b2 orientation.
double ditch_torque_closed_form(double v, double vdot, double pitch, double omega2, double alpha2,
                        const VehicleParams& params);

/// Ditch torque about the rear-axle pivot from full cross products under the
/// body-frame gravity convention, pure pitching (omega = omega2 b2).
double ditch_torque_3d(double v, double vdot, double pitch, double omega2, double alpha2,
                       const VehicleParams& params);

/// Cumulative sums of tau_ditch - tau_max and tau_min - tau_ditch over the
/// steps where they are positive.
std::vector<double> airtime_cost(const AttitudeTrace& trace, const VehicleParams& vehicle,
                                 const ConstraintParams& params);
std::vector<double> bump_cost(const AttitudeTrace& trace, const VehicleParams& vehicle,
                              const ConstraintParams& params);

}  // namespace terra
