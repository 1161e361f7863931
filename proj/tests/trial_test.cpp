#include "panslam/trial.hpp"

#include <gtest/gtest.h>

#include <fstream>

namespace panslam::sim {
namespace {

std::string write_env(const std::vector<std::string>& rows,
                      const std::string& name) {
  const std::string path = testing::TempDir() + "/" + name;
  std::ofstream out(path);
  for (const auto& r : rows) out << r << "\n";
  return path;
}

std::vector<std::string> square_room(int n) {
  std::vector<std::string> rows(static_cast<std::size_t>(n),
                                std::string(static_cast<std::size_t>(n), '.'));
  rows.front().assign(static_cast<std::size_t>(n), '#');
  rows.back().assign(static_cast<std::size_t>(n), '#');
  for (auto& r : rows) {
    r.front() = '#';
    r.back() = '#';
  }
  return rows;
}

cfg::ExperimentConfig room_config(double duration, int n = 20) {
  cfg::ExperimentConfig c;
  c.env_path = write_env(square_room(n), "room" + std::to_string(n) + ".txt");
  c.env_resolution = 0.25;
  c.start_x = n * 0.25 / 2.0;
  c.start_y = n * 0.25 / 2.0;
  c.duration = duration;
  c.jobs = 1;
  return c;
}

TEST(LoadEnvironment, SmallBorderedMapLoads) {
  const auto path = write_env({"#####", "#...#", "#...#", "#...#", "#####"},
                              "tiny.txt");
  const auto env = world::load_environment(path, 0.5);
  EXPECT_EQ(env.spec.width, 5);
  EXPECT_EQ(env.spec.height, 5);
  EXPECT_EQ(env.free_count(), 9u);
}

TEST(LoadEnvironment, DistinctErrorCodes) {
  const auto open_path = write_env({"#####", "#...#", "#....", "#####"},
                                   "open.txt");
  try {
    world::load_environment(open_path, 0.5);
    FAIL() << "unbounded map accepted";
  } catch (const world::EnvLoadError& e) {
    EXPECT_EQ(e.code(), world::EnvError::kUnbounded);
  }

  const auto bad_path = write_env({"#####", "#.x.#", "#####"}, "bad.txt");
  try {
    world::load_environment(bad_path, 0.5);
    FAIL() << "malformed map accepted";
  } catch (const world::EnvLoadError& e) {
    EXPECT_EQ(e.code(), world::EnvError::kMalformed);
  }

  const auto ok = world::load_environment(
      write_env({"#####", "#...#", "#...#", "#####"}, "ok.txt"), 0.5);
  try {
    world::validate_start(ok, 0.6, 0.6, 0.2);  // hugs the corner walls
    FAIL() << "colliding start accepted";
  } catch (const world::EnvLoadError& e) {
    EXPECT_EQ(e.code(), world::EnvError::kStartInObstacle);
  }
}

TEST(LoadEnvironment, OfficeFixtureMatchesFileCharacterCount) {
  const std::string path = std::string(PANSLAM_ENV_DIR) + "/office.txt";
  const auto env = world::load_environment(path, 0.25);
  // independent count straight from the file bytes
  std::ifstream in(path);
  std::size_t occupied = 0, total = 0;
  char ch;
  while (in.get(ch)) {
    if (ch == '#') ++occupied;
    if (ch == '#' || ch == '.') ++total;
  }
  EXPECT_EQ(env.occupied_count(), occupied);
  EXPECT_EQ(env.spec.size(), total);
  EXPECT_EQ(env.spec.width, 80);
  EXPECT_EQ(env.spec.height, 80);
}

TEST(GroundTruth, OfficeHasAllThreeClasses) {
  const std::string path = std::string(PANSLAM_ENV_DIR) + "/office.txt";
  const auto env = world::load_environment(path, 0.25);
  const auto gt = world::ground_truth_classes(env, 0.05, 10.125, 10.125, 0.2);
  std::size_t n_free = 0, n_occ = 0, n_unk = 0;
  for (auto c : gt.cls) {
    if (c == static_cast<std::uint8_t>(gridkern::CellClass::kFree)) ++n_free;
    if (c == static_cast<std::uint8_t>(gridkern::CellClass::kOccupied)) ++n_occ;
    if (c == static_cast<std::uint8_t>(gridkern::CellClass::kUnknown)) ++n_unk;
  }
  EXPECT_EQ(n_free + n_occ + n_unk, gt.spec.size());
  EXPECT_GT(n_free, 0u);
  EXPECT_GT(n_occ, 0u);
  EXPECT_GT(n_unk, 0u);  // sealed closet interior and wall cores
}

TEST(RunTrial, TinyDurationProducesOneStepNoLoops) {
  auto c = room_config(0.1);
  const auto out = run_trial(c, 7);
  EXPECT_GE(out.record.est_trajectory.size(), 1u);
  EXPECT_EQ(out.record.n_loop_closures, 0u);
  EXPECT_FALSE(out.record.failed);
}

TEST(RunTrial, FixedSeedGivesByteIdenticalCsv) {
  auto c = room_config(10.0);
  const auto a = run_trial(c, 3);
  const auto b = run_trial(c, 3);
  const std::string pa = testing::TempDir() + "/trial_a.csv";
  const std::string pb = testing::TempDir() + "/trial_b.csv";
  io::write_trial_csv(pa, a.record, c.sample_period);
  io::write_trial_csv(pb, b.record, c.sample_period);
  EXPECT_EQ(io::read_file(pa), io::read_file(pb));
  EXPECT_FALSE(io::read_file(pa).empty());
}

TEST(RunTrial, SingleRoomExploresToCompletion) {
  auto c = room_config(300.0, 18);  // 4.5 m square room
  c.mode = ctrl::PlatformMode::kA;
  const auto out = run_trial(c, 1);
  EXPECT_FALSE(out.record.failed) << out.record.failure_reason;
  EXPECT_TRUE(out.record.exploration_complete);
  EXPECT_LT(out.record.duration == 0.0 ? 300.0
                                       : out.record.est_trajectory.back().time,
            300.0);
  EXPECT_GT(out.record.final_bac, 0.55);
  EXPECT_GT(out.record.total_path_length, 0.5);
}

TEST(RunTrial, MergedToggleWithStillCameraMatchesWheelMetric) {
  // Mode A never moves the joint; with noiseless gyros the camera estimate
  // stays exactly zero, so merged and unmerged runs issue identical commands
  // as long as no loop closure perturbs the graphs.
  auto c = room_config(20.0);
  c.world.noise.sigma_gyro = 0.0;
  c.mode = ctrl::PlatformMode::kA;
  c.merged = true;
  const auto merged = run_trial(c, 5);
  c.merged = false;
  const auto nc = run_trial(c, 5);
  ASSERT_EQ(merged.record.n_loop_closures, 0u);
  ASSERT_EQ(nc.record.n_loop_closures, 0u);
  EXPECT_NEAR(merged.record.total_wheel_rotation,
              nc.record.total_wheel_rotation, 1e-9);
}

TEST(RunBatch, TwoSeedsOneCell) {
  auto c = room_config(5.0);
  c.n_trials = 2;
  const auto r = run_batch(c, {{ctrl::PlatformMode::kA, true}});
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_GE(r.cells[0].trials.size(), 2u);
  EXPECT_EQ(r.cells[0].summary.n_success, 2u);
  EXPECT_EQ(r.cells[0].summary.method, "A");
}

TEST(RunBatch, FullMatrixEmitsEightRows) {
  auto c = room_config(2.0);
  c.n_trials = 1;
  c.out_dir = testing::TempDir() + "/batch_out";
  std::vector<BatchCell> cells;
  for (auto m : {ctrl::PlatformMode::kA, ctrl::PlatformMode::kHH,
                 ctrl::PlatformMode::kOC, ctrl::PlatformMode::kY0})
    for (bool merged : {true, false}) cells.push_back({m, merged});
  const auto r = run_batch_to_dir(c, cells);
  EXPECT_EQ(r.cells.size(), 8u);
  const auto summary = io::read_file(c.out_dir + "/summary.csv");
  std::size_t lines = 0;
  for (char ch : summary) lines += ch == '\n' ? 1 : 0;
  EXPECT_EQ(lines, 9u);  // header + 8 rows
  EXPECT_NE(summary.find("HH_NC"), std::string::npos);
  EXPECT_NE(summary.find("Y0"), std::string::npos);
}

TEST(RunBatch, SharedSeedListAcrossCells) {
  auto c = room_config(2.0);
  c.n_trials = 2;
  c.seed = 100;
  const auto r = run_batch(c, {{ctrl::PlatformMode::kA, true},
                               {ctrl::PlatformMode::kHH, true}});
  ASSERT_EQ(r.cells.size(), 2u);
  ASSERT_GE(r.cells[0].trials.size(), 2u);
  ASSERT_GE(r.cells[1].trials.size(), 2u);
  EXPECT_EQ(r.cells[0].trials[0].seed, r.cells[1].trials[0].seed);
  EXPECT_EQ(r.cells[0].trials[1].seed, r.cells[1].trials[1].seed);
}

}  // namespace
}  // namespace panslam::sim
