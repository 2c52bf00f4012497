#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "terra/error.hpp"
#include "terra/mppi.hpp"
#include "terra/terrain.hpp"

using namespace terra;

namespace {

MppiConfig small_config(int horizon = 10) {
  MppiConfig c;
  c.horizon = horizon;
  c.n_conv = 20;
  c.n_narrow = 6;
  c.n_scaled = 5;
  c.n_reset = 3;
  return c;
}

NominalSequence ramp_nominal(int horizon) {
  NominalSequence n;
  for (int h = 0; h < horizon; ++h) n.controls.push_back({1.0 + 0.1 * h, 0.01 * h - 0.03});
  return n;
}

ElevationMap flat_map(double size = 100.0) {
  TerrainSpec s;
  s.size_x = s.size_y = size;
  return generate_terrain(s);
}

// Single constant-control sample evaluated on `map`.
SampleBatch constant_sample(const Control& u, int horizon, const PlanarState& start,
                            const ElevationMap& map, const PlannerSettings& settings) {
  SampleBatch b;
  b.resize(1, horizon);
  std::fill(b.raw.begin(), b.raw.end(), u);
  b.family[0] = SampleFamily::conventional;
  evaluate_batch(b, start, u, map, settings);
  return b;
}

SampleBatch batch_with_costs(const std::vector<double>& costs, int horizon) {
  SampleBatch b;
  b.resize(static_cast<int>(costs.size()), horizon);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  for (auto& c : b.processed) c = {2.0 + 0.2 * u(rng), 0.01 * u(rng)};
  b.cost = costs;
  return b;
}

}  // namespace

TEST(SampleRaw, ZeroNoiseConventionalEqualsNominal) {
  MppiConfig c = small_config();
  c.sigma_v = c.sigma_kappa = 0.0;
  const NominalSequence nom = ramp_nominal(c.horizon);
  SampleBatch b;
  sample_raw(nom, c, 0, b);
  for (int i = 0; i < c.n_conv + c.n_narrow; ++i) {
    const auto row = b.raw_row(i);
    for (int h = 0; h < c.horizon; ++h) EXPECT_EQ(row[h], nom.controls[h]);
  }
}

TEST(SampleRaw, ZeroNoiseScaledHalvesVelocity) {
  MppiConfig c = small_config();
  c.sigma_v = c.sigma_kappa = 0.0;
  c.speed_scale = 0.5;
  const NominalSequence nom = ramp_nominal(c.horizon);
  SampleBatch b;
  sample_raw(nom, c, 0, b);
  for (int i = c.n_conv + c.n_narrow; i < c.n_conv + c.n_narrow + c.n_scaled; ++i) {
    EXPECT_EQ(b.family[i], SampleFamily::scaled);
    const auto row = b.raw_row(i);
    for (int h = 0; h < c.horizon; ++h) {
      EXPECT_EQ(row[h].v, 0.5 * nom.controls[h].v);
      EXPECT_EQ(row[h].kappa, nom.controls[h].kappa);
    }
  }
}

TEST(SampleRaw, ZeroNoiseResetMeans) {
  MppiConfig c = small_config();
  c.sigma_v = c.sigma_kappa = 0.0;
  SampleBatch b;
  sample_raw(ramp_nominal(c.horizon), c, 0, b);
  const int first = c.samples() - c.n_reset;
  const double expect[3] = {0.0, -c.kappa_reset, c.kappa_reset};
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(b.family[first + j], SampleFamily::reset);
    for (const Control& u : b.raw_row(first + j)) {
      EXPECT_EQ(u.v, 0.0);
      EXPECT_EQ(u.kappa, expect[j]);
    }
  }
}

TEST(SampleRaw, NarrowSpreadIsScaled) {
  MppiConfig c = small_config(40);
  c.n_conv = 400;
  c.n_narrow = 400;
  c.n_scaled = c.n_reset = 0;
  NominalSequence nom{std::vector<Control>(40)};
  SampleBatch b;
  sample_raw(nom, c, 3, b);
  double conv = 0, narrow = 0;
  for (int i = 0; i < 400; ++i)
    for (const Control& u : b.raw_row(i)) conv += u.v * u.v;
  for (int i = 400; i < 800; ++i)
    for (const Control& u : b.raw_row(i)) narrow += u.v * u.v;
  EXPECT_NEAR(narrow / conv, c.narrow_scale, 0.03);
}

TEST(SampleRaw, DeterministicInSeedAndIteration) {
  const MppiConfig c = small_config();
  SampleBatch a, b, d;
  sample_raw(ramp_nominal(c.horizon), c, 5, a);
  sample_raw(ramp_nominal(c.horizon), c, 5, b);
  sample_raw(ramp_nominal(c.horizon), c, 6, d);
  EXPECT_EQ(a.raw, b.raw);
  EXPECT_NE(a.raw, d.raw);
}

TEST(Weights, NormalizedAndShiftInvariant) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 50);
  for (double lambda : {1e-3, 0.1, 1.0, 10.0, 1e3}) {
    std::vector<double> costs(257);
    for (double& c : costs) c = u(rng);
    const auto w = mppi_weights(costs, lambda);
    EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
    std::vector<double> shifted = costs;
    for (double& c : shifted) c += 1234.5;
    const auto ws = mppi_weights(shifted, lambda);
    for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(w[i], ws[i], 1e-12);
  }
}

TEST(Weights, InfiniteCostsGetZeroWeight) {
  const double inf = std::numeric_limits<double>::infinity();
  const auto w = mppi_weights(std::vector<double>{1.0, inf, 1.0}, 1.0);
  EXPECT_EQ(w[1], 0.0);
  EXPECT_DOUBLE_EQ(w[0], 0.5);
  EXPECT_THROW(mppi_weights(std::vector<double>{inf, inf}, 1.0), DegenerateBatch);
}

TEST(Update, EqualCostsAverage) {
  const int H = 6;
  SampleBatch b = batch_with_costs(std::vector<double>(5, 3.0), H);
  FeasibilityLimits loose;
  loose.dv_max = loose.dkappa_max = 100.0;
  const UpdateResult r = mppi_update(b, 1.0, {2.0, 0.0}, loose);
  for (int h = 0; h < H; ++h) {
    double v = 0, k = 0;
    for (int i = 0; i < 5; ++i) {
      v += b.processed_row(i)[h].v / 5;
      k += b.processed_row(i)[h].kappa / 5;
    }
    EXPECT_NEAR(r.nominal.controls[h].v, v, 1e-12);
    EXPECT_NEAR(r.nominal.controls[h].kappa, k, 1e-12);
  }
}

TEST(Update, TinyLambdaPicksArgmin) {
  const int H = 6;
  SampleBatch b = batch_with_costs({5.0, 2.0, 7.0, 2.5, 9.0}, H);
  FeasibilityLimits loose;
  loose.dv_max = loose.dkappa_max = 100.0;
  const UpdateResult r = mppi_update(b, 1e-9, {2.0, 0.0}, loose);
  for (int h = 0; h < H; ++h) {
    EXPECT_NEAR(r.nominal.controls[h].v, b.processed_row(1)[h].v, 1e-12);
    EXPECT_NEAR(r.nominal.controls[h].kappa, b.processed_row(1)[h].kappa, 1e-12);
  }
}

TEST(Update, SingleSampleWeightOne) {
  SampleBatch b = batch_with_costs({42.0}, 4);
  FeasibilityLimits loose;
  loose.dv_max = loose.dkappa_max = 100.0;
  const UpdateResult r = mppi_update(b, 1.0, {2.0, 0.0}, loose);
  EXPECT_EQ(r.weights[0], 1.0);
  for (int h = 0; h < 4; ++h) EXPECT_EQ(r.nominal.controls[h], b.processed_row(0)[h]);
}

TEST(Update, CommandInvariantToCostShift) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 20);
  std::vector<double> costs(64);
  for (double& c : costs) c = u(rng);
  SampleBatch a = batch_with_costs(costs, 8);
  SampleBatch b = a;
  for (double& c : b.cost) c += 1e3;
  const FeasibilityLimits lim;
  const UpdateResult ra = mppi_update(a, 1.0, {2.0, 0.0}, lim);
  const UpdateResult rb = mppi_update(b, 1.0, {2.0, 0.0}, lim);
  EXPECT_NEAR(ra.command.v, rb.command.v, 1e-12);
  EXPECT_NEAR(ra.command.kappa, rb.command.kappa, 1e-12);
}

TEST(Shift, Examples) {
  const NominalSequence s = shift({{{1, 0}, {2, 0}, {3, 0}}});
  EXPECT_EQ(s.controls, (std::vector<Control>{{2, 0}, {3, 0}, {3, 0}}));
  const NominalSequence c{std::vector<Control>(4, Control{1.5, 0.1})};
  EXPECT_EQ(shift(c).controls, c.controls);
  NominalSequence r = ramp_nominal(7);
  const Control last = r.controls.back();
  for (int i = 0; i < 7; ++i) r = shift(r);
  for (const Control& u : r.controls) EXPECT_EQ(u, last);
}

TEST(Evaluate, FlatStraightHasNoConstraintCost) {
  const ElevationMap m = flat_map();
  PlannerSettings s;
  s.mppi = small_config(30);
  const SampleBatch b = constant_sample({4.0, 0.0}, 30, {0, 0, 0}, m, s);
  EXPECT_EQ(b.rollover_cost[0], 0.0);
  EXPECT_EQ(b.airtime_cost[0], 0.0);
  EXPECT_EQ(b.bump_cost[0], 0.0);
  EXPECT_EQ(b.cost[0], 0.0);
  EXPECT_EQ(b.off_map[0], 0);
}

TEST(Evaluate, OffCamberTurnOnIncline) {
  TerrainSpec t;
  t.kind = TerrainKind::incline;
  t.size_x = t.size_y = 100.0;
  const ElevationMap m = generate_terrain(t);
  PlannerSettings s;
  s.mppi = small_config(10);
  // heading -y, left side up-slope, turning left: lateral load and gravity add up
  const SampleBatch b = constant_sample({10.0, 1.0 / 15}, 10, {0, 0, -std::numbers::pi / 2}, m, s);
  EXPECT_NEAR(b.rr_row(0)[0], (100.0 / 15 + 9.81 * std::sin(10 * std::numbers::pi / 180)) /
                                  std::cos(10 * std::numbers::pi / 180),
              1e-9);
  EXPECT_GT(b.rr_row(0)[0], 8.0);
  EXPECT_GT(b.rollover_cost[0], 0.0);
}

TEST(Evaluate, DitchCostFallsWithSpeed) {
  TerrainSpec t;
  t.kind = TerrainKind::v_ditch;
  t.size_x = t.size_y = 60.0;
  t.resolution = 0.1;
  const ElevationMap m = generate_terrain(t);
  PlannerSettings s;
  s.mppi = small_config(50);
  auto ditch = [&](double v) {
    const SampleBatch b = constant_sample({v, 0.0}, 50, {-6.5, 0, 0}, m, s);
    EXPECT_EQ(b.off_map[0], 0);
    return b.airtime_cost[0] + b.bump_cost[0];
  };
  const double fast = ditch(5.0);
  const double slow = ditch(1.0);
  EXPECT_GT(fast, 0.0);
  EXPECT_LT(slow, fast);
}

TEST(Evaluate, DitchMarginOnlyAddsCost) {
  TerrainSpec t;
  t.kind = TerrainKind::v_ditch;
  t.size_x = t.size_y = 60.0;
  t.resolution = 0.1;
  const ElevationMap m = generate_terrain(t);
  PlannerSettings s;
  s.mppi = small_config(50);
  const SampleBatch plain = constant_sample({4.0, 0.0}, 50, {-12, 0, 0}, m, s);
  s.mppi.ditch_margin = 2.0;
  const SampleBatch tight = constant_sample({4.0, 0.0}, 50, {-12, 0, 0}, m, s);
  s.mppi.ditch_margin = 0.0;
  s.mppi.ditch_phases = 4;
  const SampleBatch phased = constant_sample({4.0, 0.0}, 50, {-12, 0, 0}, m, s);
  EXPECT_GT(tight.cost[0], plain.cost[0]);
  EXPECT_GE(phased.cost[0], plain.cost[0]);
  EXPECT_EQ(tight.tau, plain.tau);
}

TEST(Evaluate, OffMapPenalty) {
  const ElevationMap m = flat_map(20.0);
  PlannerSettings s;
  s.mppi = small_config(30);
  const SampleBatch b = constant_sample({5.0, 0.0}, 30, {0, 0, 0}, m, s);
  EXPECT_EQ(b.off_map[0], 1);
  EXPECT_EQ(b.cost[0], s.mppi.out_of_map_penalty);
}

TEST(Evaluate, RollAngleBaselineIgnoresSpeed) {
  TerrainSpec t;
  t.kind = TerrainKind::incline;
  t.angle_deg = 25.0;
  t.size_x = t.size_y = 100.0;
  const ElevationMap m = generate_terrain(t);
  PlannerSettings s;
  s.mppi = small_config(10);
  s.mppi.rollover_mode = RolloverCostMode::roll_angle;
  s.constraints.w1 = 1.0;
  const double slow = constant_sample({1.0, 0.0}, 10, {0, 0, std::numbers::pi / 2}, m, s).cost[0];
  const double fast = constant_sample({3.0, 0.0}, 10, {0, 0, std::numbers::pi / 2}, m, s).cost[0];
  EXPECT_NEAR(slow, 10 * (25.0 - 20.0) * std::numbers::pi / 180, 1e-9);
  EXPECT_NEAR(slow, fast, 1e-9);
}

TEST(Planner, BitIdenticalAcrossThreadCounts) {
  TerrainSpec t;
  t.kind = TerrainKind::incline;
  t.size_x = t.size_y = 100.0;
  const ElevationMap m = generate_terrain(t);
  PlannerSettings s;
  s.mppi.seed = 9;
  s.task.target_speed = 5.0;
  s.task.w_speed = 1.0;
  std::vector<std::vector<double>> costs;
  std::vector<Control> cmds;
  for (int threads : {1, 2, 5}) {
    Planner p(s, threads);
    Control last;
    for (int i = 0; i < 4; ++i) last = p.plan_step({0, 0, 0.3}, DelayConfig{}, m).command;
    cmds.push_back(last);
    costs.push_back(p.batch().cost);
  }
  EXPECT_EQ(cmds[0], cmds[1]);
  EXPECT_EQ(cmds[0], cmds[2]);
  EXPECT_EQ(costs[0], costs[1]);
  EXPECT_EQ(costs[0], costs[2]);
}

TEST(Planner, SpeedGoalRisesAtMostDvPerCall) {
  const ElevationMap m = flat_map(400.0);
  PlannerSettings s;
  s.mppi = small_config(20);
  s.mppi.n_conv = 200;
  s.limits.v_cap = 3.0;
  s.task.target_speed = 10.0;
  s.task.w_speed = 1.0;
  Planner p(s, 1);
  double prev = 0.0;
  for (int i = 0; i < 25; ++i) {
    const Control u = p.plan_step({0, 0, 0}, DelayConfig{}, m).command;
    EXPECT_LE(u.v - prev, s.limits.dv_max + 1e-12);
    EXPECT_LE(u.v, s.limits.v_cap + 1e-12);
    prev = u.v;
  }
  EXPECT_GT(prev, 2.5);
}

TEST(Planner, GoallessHoldsStill) {
  const ElevationMap m = flat_map();
  PlannerSettings s;
  s.limits.v_floor = -s.limits.v_cap;
  Planner p(s, 1);
  for (int i = 0; i < 30; ++i) {
    const Control u = p.plan_step({0, 0, 0}, DelayConfig{}, m).command;
    EXPECT_LT(std::abs(u.v), 0.1);
    EXPECT_LT(std::abs(u.kappa), 0.005);
  }
}

TEST(Planner, GoallessCreepWithForwardOnlyFloor) {
  // v >= 0 rectifies the speed noise into a slow forward creep
  const ElevationMap m = flat_map();
  Planner p(PlannerSettings{}, 1);
  for (int i = 0; i < 30; ++i) {
    const Control u = p.plan_step({0, 0, 0}, DelayConfig{}, m).command;
    EXPECT_GE(u.v, 0.0);
    EXPECT_LT(u.v, 0.6);
    EXPECT_LT(std::abs(u.kappa), 0.005);
  }
}

TEST(Planner, EmittedNominalIsFeasible) {
  TerrainSpec t;
  t.kind = TerrainKind::sine_bumps;
  t.size_x = t.size_y = 100.0;
  const ElevationMap m = generate_terrain(t);
  PlannerSettings s;
  s.mppi = small_config(25);
  s.mppi.n_conv = 100;
  s.task.target_speed = 6.0;
  s.task.w_speed = 1.0;
  s.task.path = PathKind::circle;
  s.task.w_path = 1.0;
  Planner p(s, 1);
  for (int i = 0; i < 30; ++i) {
    const PlanResult r = p.plan_step({15, 0, std::numbers::pi / 2}, DelayConfig{}, m);
    const auto again = process_feasible(r.nominal.controls, r.command, s.limits);
    EXPECT_EQ(again, r.nominal.controls);
    EXPECT_EQ(r.nominal.controls.back(), r.nominal.controls[r.nominal.controls.size() - 2]);
  }
}

TEST(Planner, WeightOnRolloverLowersRisk) {
  TerrainSpec t;
  t.kind = TerrainKind::incline;
  t.size_x = t.size_y = 100.0;
  const ElevationMap m = generate_terrain(t);
  auto best_rr = [&](double w1) {
    PlannerSettings s;
    s.mppi.seed = 3;
    s.task.target_speed = 12.0;
    s.task.w_speed = 1.0;
    s.constraints.w1 = w1;
    Planner p(s, 1);
    p.set_nominal({std::vector<Control>(50, Control{9.0, 1.0 / 15})});
    p.set_last_command({9.0, 1.0 / 15});
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      const PlanResult r = p.plan_step({0, 0, -std::numbers::pi / 2}, DelayConfig{}, m);
      for (double x : r.diagnostics.best_rr) worst = std::max(worst, x);
    }
    return worst;
  };
  EXPECT_LT(best_rr(100.0), best_rr(0.0));
}

TEST(Config, Validation) {
  MppiConfig c;
  EXPECT_NO_THROW(c.validate());
  c.horizon = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.lambda = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.ditch_phases = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(c.samples(), 1024);
}
