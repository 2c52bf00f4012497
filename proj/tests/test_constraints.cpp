#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "terra/constraints.hpp"
#include "terra/error.hpp"

using namespace terra;

namespace {

constexpr double kG = 9.81;

AttitudeTrace trace_with(std::vector<double> v, std::vector<double> kappa, std::vector<double> roll) {
  AttitudeTrace t;
  const std::size_t n = v.size();
  t.v = std::move(v);
  t.kappa = std::move(kappa);
  t.roll = std::move(roll);
  t.pitch.assign(n, 0.0);
  t.omega2.assign(n, 0.0);
  t.alpha2.assign(n, 0.0);
  return t;
}

}  // namespace

TEST(RolloverRisk, Examples) {
  EXPECT_EQ(rollover_risk(0.0, 0.3, 0.0), 0.0);
  EXPECT_NEAR(rollover_risk(7.1414, 1.0 / 15, 0.0), 3.400, 5e-4);
  const double phi = std::asin(25.0 / 15.0 / kG);
  EXPECT_NEAR(phi, 0.1707, 1e-4);
  EXPECT_NEAR(rollover_risk(5.0, 1.0 / 15, phi), 0.0, 1e-12);
}

TEST(RolloverRisk, MirrorSymmetry) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 1000; ++i) {
    const double v = 12 * std::abs(u(rng)), k = 0.1 * u(rng), phi = 0.6 * u(rng);
    EXPECT_NEAR(rollover_risk(v, k, phi), rollover_risk(v, -k, -phi), 1e-12);
  }
}

TEST(RolloverRisk, SteepRollThrows) {
  EXPECT_THROW(rollover_risk(1.0, 0.0, std::numbers::pi / 2), SteepRoll);
}

TEST(RolloverCost, ZeroWhenBelowLimit) {
  const auto c = rollover_cost(trace_with({1, 2, 3}, {0.01, 0.01, 0.01}, {0, 0, 0}), {});
  for (double x : c) EXPECT_EQ(x, 0.0);
}

TEST(RolloverCost, SingleViolationCarriesForward) {
  // v^2 kappa = 5 at step 1.
  const auto c = rollover_cost(trace_with({1, std::sqrt(5.0), 1}, {0, 1, 0}, {0, 0, 0}), {});
  EXPECT_EQ(c[0], 0.0);
  EXPECT_NEAR(c[1], 5.0, 1e-12);
  EXPECT_NEAR(c[2], 5.0, 1e-12);
}

TEST(RolloverCost, TwoViolationsSum) {
  const auto c = rollover_cost(trace_with({2, 1, std::sqrt(5.0)}, {1, 0, 1}, {0, 0, 0}), {});
  EXPECT_NEAR(c.back(), 9.0, 1e-12);
}

TEST(RolloverMargin, FlatStaticIsMinusP2G) {
  VehicleParams p;
  EXPECT_NEAR(rollover_margin_3d(0, 0, 0, 0, 0, p, Side::left), -p.p2 * kG, 1e-12);
  EXPECT_NEAR(rollover_margin_3d(0, 0, 0, 0, 0, p, Side::right), -p.p2 * kG, 1e-12);
  EXPECT_NEAR(rollover_scalar_margin(0, 0, 0, p), -p.p2 * kG, 1e-12);
}

TEST(RolloverMargin, BoundaryIsZero) {
  VehicleParams p;
  for (double phi : {-0.3, 0.0, 0.25}) {
    const double lateral = kG * (p.p2 * std::cos(phi) + p.p3 * std::sin(phi)) / p.p3;
    const double v = 6.0;
    const double k = lateral / (v * v);
    EXPECT_NEAR(rollover_scalar_margin(v, k, phi, p), 0.0, 1e-12);
    EXPECT_NEAR(rollover_margin_3d(v, k, phi, 0, 0, p, Side::right), 0.0, 1e-12);
  }
}

TEST(RolloverMargin, ScalarEqualsWorseSideOf3dOracle) {
  VehicleParams p;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uv(0, 12), uk(-0.1, 0.1), up(-35.0, 35.0);
  for (int i = 0; i < 20000; ++i) {
    const double v = uv(rng), k = uk(rng), phi = up(rng) * std::numbers::pi / 180;
    const double s = rollover_scalar_margin(v, k, phi, p);
    const double l = rollover_margin_3d(v, k, phi, 0, 0, p, Side::left);
    const double r = rollover_margin_3d(v, k, phi, 0, 0, p, Side::right);
    EXPECT_NEAR(s, std::max(l, r), 1e-9);
    EXPECT_EQ(s < 0, std::max(l, r) < 0);
  }
}

TEST(RolloverMargin, ScalarFactorsIntoRiskBound) {
  VehicleParams p;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> uv(0, 12), uk(-0.1, 0.1), up(-0.6, 0.6);
  for (int i = 0; i < 20000; ++i) {
    const double v = uv(rng), k = uk(rng), phi = up(rng);
    const double rr = rollover_risk(v, k, phi, p.g);
    EXPECT_EQ(rollover_scalar_margin(v, k, phi, p) < 0, rr < p.rr_hard_limit());
  }
}

TEST(PitchRates, ConstantGivesZero) {
  const std::vector<double> th(6, 0.3);
  const PitchRates r = pitch_rates(th, 0.1);
  for (std::size_t k = 0; k < th.size(); ++k) {
    EXPECT_EQ(r.omega2[k], 0.0);
    EXPECT_EQ(r.alpha2[k], 0.0);
  }
}

TEST(PitchRates, RampGivesConstantRate) {
  std::vector<double> th(8);
  for (int k = 0; k < 8; ++k) th[k] = 0.5 * k * 0.25;
  const PitchRates r = pitch_rates(th, 0.25);
  for (int k = 0; k < 8; ++k) {
    EXPECT_NEAR(r.omega2[k], 0.5, 1e-12);
    EXPECT_NEAR(r.alpha2[k], 0.0, 1e-12);
  }
}

TEST(PitchRates, QuadraticExactAtInteriorPoints) {
  const double dt = 0.1, beta = 1.7, c = -0.4, d = 0.2;
  std::vector<double> th(12);
  for (int k = 0; k < 12; ++k) {
    const double t = k * dt;
    th[k] = 0.5 * beta * t * t + c * t + d;
  }
  const PitchRates r = pitch_rates(th, dt);
  for (int k = 0; k + 2 < 12; ++k) {
    EXPECT_NEAR(r.alpha2[k], beta, 1e-9);
    // forward difference is the derivative at the half step
    EXPECT_NEAR(r.omega2[k], beta * (k + 0.5) * dt + c, 1e-9);
  }
  EXPECT_EQ(r.omega2[11], r.omega2[10]);
  EXPECT_EQ(r.alpha2[11], r.alpha2[10]);
}

TEST(PitchRates, TooShortThrows) {
  EXPECT_THROW(pitch_rates(std::vector<double>{0.0, 1.0}, 0.1), TooShort);
}

TEST(DitchTorque, FlatCruiseIsMinusP1G) {
  VehicleParams p;
  p.p1 = 1.0;
  EXPECT_NEAR(ditch_torque(5.0, 0.0, 0.0, 0.0, p), -9.81, 1e-12);
}

TEST(DitchTorque, AirtimeRegimePositive) {
  VehicleParams p;
  EXPECT_GT(ditch_torque(5.0, 0.0, 2.5, 0.0, p), 0.0);  // v omega = 12.5 > g
  EXPECT_LT(ditch_torque(5.0, 0.0, 1.9, 0.0, p), 0.0);
}

TEST(DitchTorque, SlopeHold) {
  VehicleParams p;
  p.p1 = 1.0;
  p.p3 = 0.8;
  const double th = -10.0 * std::numbers::pi / 180;
  const double want = -0.8 * 9.81 * std::sin(th) - 9.81 * std::cos(th);
  EXPECT_NEAR(ditch_torque(0.0, th, 0.0, 0.0, p), want, 1e-12);
  EXPECT_NEAR(want, -8.2984, 5e-4);  // the worked value is rounded in the fourth decimal
}

TEST(DitchTorque, ClosedFormStaticValues) {
  VehicleParams p;
  EXPECT_NEAR(ditch_torque_closed_form(0, 0, 0, 0, 0, p), p.p1 * kG, 1e-12);
  EXPECT_NEAR(ditch_torque_closed_form(7.5, 0, 0, 0, 0, p), p.p1 * kG, 1e-12);
}

TEST(DitchTorque, DeployedIsNegatedClosedFormWithB2Reversed) {
  VehicleParams p;
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 5000; ++i) {
    const double v = 10 * u(rng), th = 0.6 * u(rng), w = 3 * u(rng), a = 20 * u(rng);
    EXPECT_NEAR(ditch_torque(v, th, w, a, p), -ditch_torque_closed_form(v, 0.0, th, -w, -a, p), 1e-12);
  }
}

TEST(DitchTorque, SameInputNegationFailsWithRates) {
  // counterexample recorded for the identity: theta = 0, omega = 0, alpha = 1
  VehicleParams p;
  EXPECT_NEAR(ditch_torque(0, 0, 0, 1, p), p.i22 - p.p1 * kG, 1e-12);
  EXPECT_NEAR(-ditch_torque_closed_form(0, 0, 0, 0, 1, p), -p.i22 - p.p1 * kG, 1e-12);
  EXPECT_NEAR(ditch_torque(0, 0, 0, 0, p), -ditch_torque_closed_form(0, 0, 0, 0, 0, p), 1e-12);
}

TEST(DitchTorque, VectorOracleMatchesDeployed) {
  VehicleParams p;
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 2000; ++i) {
    const double v = 10 * u(rng), th = 0.6 * u(rng), w = 3 * u(rng), a = 20 * u(rng),
                 vd = 3 * u(rng);
    EXPECT_NEAR(ditch_torque_3d(v, 0.0, th, w, a, p), ditch_torque(v, th, w, a, p), 1e-10);
    EXPECT_NEAR(ditch_torque_3d(v, vd, th, w, a, p), -ditch_torque_closed_form(v, -vd, th, -w, -a, p),
                1e-10);
  }
}

TEST(DitchCosts, InsideBandIsZero) {
  AttitudeTrace t = trace_with({2, 2, 2}, {0, 0, 0}, {0, 0, 0});
  EXPECT_EQ(airtime_cost(t, {}, {}).back(), 0.0);
  EXPECT_EQ(bump_cost(t, {}, {}).back(), 0.0);
}

TEST(DitchCosts, SingleExcursions) {
  VehicleParams p;
  ConstraintParams c;
  c.tau_max = -3.0;
  // tau = -1: raise omega so p1 v omega lifts -p1 g by p1 g - 1.
  AttitudeTrace t = trace_with({1, 1, 1}, {0, 0, 0}, {0, 0, 0});
  t.omega2[1] = (p.p1 * p.g - 1.0) / p.p1;
  EXPECT_NEAR(ditch_torque(t, p, 1), -1.0, 1e-12);
  EXPECT_NEAR(airtime_cost(t, p, c).back(), 2.0, 1e-12);

  AttitudeTrace b = trace_with({1, 1, 1}, {0, 0, 0}, {0, 0, 0});
  b.alpha2[2] = (-30.0 + p.p1 * p.g) / p.i22;
  EXPECT_NEAR(ditch_torque(b, p, 2), -30.0, 1e-12);
  EXPECT_NEAR(bump_cost(b, p, c).back(), 5.0, 1e-12);
}

TEST(Params, Validation) {
  VehicleParams v;
  ConstraintParams c;
  EXPECT_NO_THROW(c.validate(v));
  c.rr_max = 9.0;  // above g p2 / p3
  EXPECT_THROW(c.validate(v), ConfigError);
  c = {};
  c.tau_min = 0.0;
  EXPECT_THROW(c.validate(v), ConfigError);
}
