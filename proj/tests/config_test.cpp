#include "panslam/config.hpp"

#include <gtest/gtest.h>

namespace panslam::cfg {
namespace {

TEST(Config, DefaultsMatchPlatformParameters) {
  const auto c = parse_config("");
  EXPECT_EQ(c.kin.wheel_center_distance, 0.135);
  EXPECT_EQ(c.kin.wheel_radius, 0.04);
  EXPECT_NEAR(c.camera.fov, deg2rad(69.4), 1e-12);
  EXPECT_EQ(c.camera.max_depth, 4.0);
  EXPECT_EQ(c.map_resolution, 0.05);
  EXPECT_EQ(c.ctrl.horizon_steps, 20);
  EXPECT_EQ(c.ctrl.step_dt, 0.1);
  EXPECT_EQ(c.ctrl.v_max, 1.0);
  EXPECT_EQ(c.ctrl.w_max, 1.0);
  EXPECT_EQ(c.duration, 600.0);
  EXPECT_EQ(c.n_trials, 20);
  EXPECT_EQ(c.world.lrf_max_range, 12.0);
  EXPECT_NEAR(c.world.noise.encoder_tick, deg2rad(0.5), 1e-12);
  EXPECT_EQ(c.est.diff_imu_variance, 0.01);
}

TEST(Config, SectionsAndDottedKeysEquivalent) {
  const auto a = parse_config("[kin]\nD = 0.2\nr = 0.05\n");
  const auto b = parse_config("kin.D = 0.2\nkin.r = 0.05\n");
  EXPECT_EQ(a.kin.wheel_center_distance, b.kin.wheel_center_distance);
  EXPECT_EQ(a.kin.wheel_radius, 0.05);
}

TEST(Config, ParsesListsModesBoolsComments) {
  const auto c = parse_config(
      "# comment\n"
      "[run]\n"
      "mode = OC   # trailing comment\n"
      "merged = false\n"
      "seed = 42\n"
      "[kin]\n"
      "alpha = 0.1, 2.2, 4.3\n");
  EXPECT_EQ(c.mode, ctrl::PlatformMode::kOC);
  EXPECT_FALSE(c.merged);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.kin.wheel_angles[1], 2.2);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("run.typo_key = 3\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("run.duration = abc\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("run.merged = maybe\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("kin.alpha = 1, 2\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("not a key value line\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("run.mode = XX\n"), std::invalid_argument);
}

TEST(Config, ValidatesRanges) {
  EXPECT_THROW(parse_config("run.duration = 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("run.trials = 0\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("run.sim_dt = 0.5\n"), std::invalid_argument);
  EXPECT_THROW(parse_config("kin.r = -0.1\n"), std::invalid_argument);
}

TEST(Config, CliOverridesWinOverFile) {
  auto c = parse_config("[run]\nmode = A\nseed = 1\nduration = 100\n");
  CliOverrides o;
  o.mode = "HH";
  o.seed = 9;
  o.duration = 30.0;
  o.merged = "false";
  o.env = "somewhere.txt";
  apply_overrides(c, o);
  EXPECT_EQ(c.mode, ctrl::PlatformMode::kHH);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.duration, 30.0);
  EXPECT_FALSE(c.merged);
  EXPECT_EQ(c.env_path, "somewhere.txt");
  o.merged = "sideways";
  EXPECT_THROW(apply_overrides(c, o), std::invalid_argument);
}

TEST(Config, BundledConfigsParse) {
  const auto office = load_config(std::string(PANSLAM_ENV_DIR) + "/../configs/office.ini");
  EXPECT_EQ(office.env_path, "envs/office.txt");
  EXPECT_EQ(office.env_resolution, 0.25);
  EXPECT_EQ(office.start_x, 10.125);
  const auto cafe = load_config(std::string(PANSLAM_ENV_DIR) + "/../configs/cafe.ini");
  EXPECT_EQ(cafe.env_path, "envs/cafe.txt");
}

}  // namespace
}  // namespace panslam::cfg
