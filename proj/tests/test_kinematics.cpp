#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "terra/kinematics.hpp"

using namespace terra;

TEST(Step, StraightLine) {
  const PlanarState s = step({0, 0, 0}, {1, 0}, 1.0);
  EXPECT_DOUBLE_EQ(s.x, 1.0);
  EXPECT_DOUBLE_EQ(s.y, 0.0);
  EXPECT_DOUBLE_EQ(s.psi, 0.0);
}

TEST(Step, HeadingAdvancesByVKappaDt) {
  const PlanarState s = step({0, 0, 0}, {1, std::numbers::pi / 2}, 1.0);
  EXPECT_DOUBLE_EQ(s.psi, std::numbers::pi / 2);
}

TEST(Step, ZeroVelocityHoldsState) {
  const PlanarState s0{1.5, -2.0, 0.7};
  for (double k : {-0.2, 0.0, 3.0}) {
    const PlanarState s = step(s0, {0, k}, 0.37);
    EXPECT_EQ(s.x, s0.x);
    EXPECT_EQ(s.y, s0.y);
    EXPECT_EQ(s.psi, s0.psi);
  }
}

TEST(Step, HeadingIsContinuous) {
  // heading is not wrapped, so it accumulates exactly v kappa dt per step
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-5, 5);
  PlanarState s{};
  for (int i = 0; i < 1000; ++i) {
    const Control c{u(rng), u(rng)};
    const PlanarState n = step(s, c, 0.3);
    EXPECT_EQ(n.psi, s.psi + c.v * 0.3 * c.kappa);
    s = n;
  }
}

TEST(Rollout, StraightPositions) {
  const std::vector<Control> u(3, Control{1, 0});
  const auto xs = rollout({0, 0, 0}, u, 1.0);
  ASSERT_EQ(xs.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(xs[i].x, i);
}

TEST(Rollout, ZeroVelocityConstant) {
  const std::vector<Control> u(5, Control{0, 0.1});
  for (const PlanarState& s : rollout({2, 3, 1}, u, 0.1)) {
    EXPECT_EQ(s.x, 2.0);
    EXPECT_EQ(s.psi, 1.0);
  }
}

TEST(Rollout, SemigroupSplit) {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<Control> c(20);
  for (auto& x : c) x = {3 * u(rng), 0.2 * u(rng)};
  const auto whole = rollout({0, 0, 0.3}, c, 0.1);
  const auto first = rollout({0, 0, 0.3}, std::span(c).first(8), 0.1);
  const auto second = rollout(first.back(), std::span(c).subspan(8), 0.1);
  EXPECT_EQ(whole.back().x, second.back().x);
  EXPECT_EQ(whole.back().y, second.back().y);
  EXPECT_EQ(whole.back().psi, second.back().psi);
}

TEST(Feasible, VelocityClip) {
  FeasibilityLimits l;
  l.dv_max = 0.5;
  const auto out = process_feasible(std::vector<Control>{{6, 0}}, {5, 0}, l);
  EXPECT_DOUBLE_EQ(out[0].v, 5.5);
}

TEST(Feasible, CurvatureFrozenBelowVmin) {
  FeasibilityLimits l;
  l.v_min = 0.1;
  const auto out = process_feasible(std::vector<Control>{{0.05, 0.3}}, {0.05, 0.1}, l);
  EXPECT_DOUBLE_EQ(out[0].kappa, 0.1);
}

TEST(Feasible, InBoundsIsIdentity) {
  FeasibilityLimits l;
  const std::vector<Control> raw{{1.0, 0.01}, {1.2, 0.02}, {1.1, 0.0}};
  const auto out = process_feasible(raw, {1.0, 0.0}, l);
  EXPECT_EQ(out, raw);
}

TEST(Feasible, InvariantsAndIdempotence) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1, 1);
  FeasibilityLimits l;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Control> raw(30);
    for (auto& c : raw) c = {15 * u(rng), 0.5 * u(rng)};
    const Control prev{4 * (u(rng) + 1), 0.1 * u(rng)};
    const auto out = process_feasible(raw, prev, l);
    Control p = prev;
    for (const Control& c : out) {
      EXPECT_LE(std::abs(c.v - p.v), l.dv_max + 1e-12);
      EXPECT_LE(std::abs(c.kappa - p.kappa), l.dkappa_max + 1e-12);
      EXPECT_LE(std::abs(c.kappa), l.kappa_max + 1e-12);
      EXPECT_LE(c.v, l.v_cap + 1e-12);
      EXPECT_GE(c.v, l.v_floor - 1e-12);
      if (std::abs(c.v) < l.v_min) {
        EXPECT_EQ(c.kappa, p.kappa);
      }
      p = c;
    }
    EXPECT_EQ(process_feasible(out, prev, l), out);
  }
}

TEST(Projection, NoDelayIsIdentity) {
  const PlanarState s{1, 2, 0.5};
  const PlanarState p = project_state(s, DelayConfig{}, 0.1);
  EXPECT_EQ(p.x, s.x);
  EXPECT_EQ(p.y, s.y);
  EXPECT_EQ(p.psi, s.psi);
}

TEST(Projection, TwoStraightSteps) {
  const PlanarState p = project_state({0, 0, 0}, DelayConfig{{{1, 0}, {1, 0}}}, 0.1);
  EXPECT_NEAR(p.x, 0.2, 1e-15);
  EXPECT_EQ(p.y, 0.0);
  EXPECT_EQ(p.psi, 0.0);
}

TEST(Projection, ZeroVelocityPendingIsIdentity) {
  const PlanarState s{1, 2, 0.5};
  const PlanarState p = project_state(s, DelayConfig{{{0, 0.2}}}, 0.1);
  EXPECT_EQ(p.x, s.x);
  EXPECT_EQ(p.psi, s.psi);
}

TEST(WrapAngle, Range) {
  EXPECT_NEAR(wrap_angle(3 * std::numbers::pi), std::numbers::pi, 1e-12);
  EXPECT_NEAR(wrap_angle(-0.5 + 4 * std::numbers::pi), -0.5, 1e-12);
}
