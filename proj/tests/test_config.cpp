#include <gtest/gtest.h>

#include <sstream>

#include "terra/config.hpp"
#include "terra/error.hpp"

using namespace terra;

TEST(Config, DumpLoadRoundTripIsExact) {
  for (TaskKind k : {TaskKind::hill_circle, TaskKind::ditch_cross, TaskKind::slalom}) {
    TaskSpec spec = make_task(k);
    spec.planner.mppi.sigma_v = 0.1 + 1.0 / 3.0;
    spec.plant.drag = 1e-7;
    const std::string dumped = dump_config(spec);
    std::istringstream in(dumped);
    const TaskSpec back = load_config(in, TaskSpec{});
    EXPECT_EQ(dump_config(back), dumped);
    EXPECT_EQ(back.planner.mppi.sigma_v, spec.planner.mppi.sigma_v);
    EXPECT_EQ(back.kind, k);
  }
}

TEST(Config, KeysAreUnique) {
  const auto keys = config_keys();
  std::set<std::string> unique(keys.begin(), keys.end());
  EXPECT_EQ(unique.size(), keys.size());
  EXPECT_GT(keys.size(), 80u);
}

TEST(Config, CommentsAndBlanks) {
  std::istringstream in("# top\n\n[constraints]\nrr_max = 2.7  # lower\n[mppi]\nseed=7\n");
  const TaskSpec s = load_config(in, make_task(TaskKind::hill_circle));
  EXPECT_EQ(s.planner.constraints.rr_max, 2.7);
  EXPECT_EQ(s.planner.mppi.seed, 7u);
}

TEST(Config, UnknownKeyNamesLine) {
  std::istringstream in("[mppi]\nhorizon = 20\nbogus = 1\n");
  try {
    load_config(in, TaskSpec{});
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("line 3"), std::string::npos);
    EXPECT_NE(what.find("mppi.bogus"), std::string::npos);
  }
}

TEST(Config, SyntaxErrors) {
  std::istringstream no_eq("[mppi]\nhorizon 20\n");
  EXPECT_THROW(parse_config(no_eq), ParseError);
  std::istringstream no_section("horizon = 20\n");
  EXPECT_THROW(parse_config(no_section), ParseError);
  std::istringstream bad_header("[mppi\n");
  EXPECT_THROW(parse_config(bad_header), ParseError);
  std::istringstream bad_value("[mppi]\nhorizon = twenty\n");
  EXPECT_THROW(load_config(bad_value, TaskSpec{}), ConfigError);
}

TEST(Config, ValidationRunsAfterLoad) {
  std::istringstream in("[constraints]\nrr_max = 20\n");
  EXPECT_THROW(load_config(in, TaskSpec{}), ConfigError);
}

TEST(Config, OverridesAndAliases) {
  TaskSpec s = make_task(TaskKind::ditch_cross);
  apply_override(s, "mppi.w2=0");
  apply_override(s, "constraints.w3 = 0");
  apply_override(s, "terrain.kind=incline");
  apply_override(s, "mppi.rollover_mode=roll_angle");
  EXPECT_EQ(s.planner.constraints.w2, 0.0);
  EXPECT_EQ(s.planner.constraints.w3, 0.0);
  EXPECT_EQ(s.terrain.kind, TerrainKind::incline);
  EXPECT_EQ(s.planner.mppi.rollover_mode, RolloverCostMode::roll_angle);
  EXPECT_THROW(apply_override(s, "nodot=1"), ConfigError);
  EXPECT_THROW(apply_override(s, "mppi.nothing=1"), ConfigError);
  EXPECT_EQ(dump_config(s).find("[mppi]\nw2"), std::string::npos);
}

TEST(Config, TaskNameLookup) {
  std::istringstream in("[run]\ntask = ditch-cross\n");
  EXPECT_EQ(config_task_name(parse_config(in)), "ditch-cross");
  std::istringstream none("[mppi]\nseed = 1\n");
  EXPECT_EQ(config_task_name(parse_config(none)), "");
}
