#pragma once

#include <array>
#include <map>
#include <string>

#include "panslam/controller.hpp"
#include "panslam/kinematics.hpp"
#include "panslam/occupancy.hpp"
#include "panslam/pose_graph.hpp"
#include "panslam/world.hpp"

namespace panslam::cfg {

/// Robot EKF noise-rate and prior settings, plus the camera-joint filter.
struct EstimationConfig {
  double q_pos = 1e-6;      // m^2/s drift of the pose integrator
  double q_theta = 1e-6;    // rad^2/s
  double q_vel = 0.05;      // (m/s)^2/s velocity random walk
  double q_omega = 0.05;    // (rad/s)^2/s
  double init_pos_var = 1e-6;
  double init_theta_var = 1e-6;
  double init_vel_var = 1e-4;
  double q_gamma = 1e-6;       // camera angle drift
  double q_dgamma = 0.2;       // joint rate random walk
  double diff_imu_variance = est::kDifferentialImuVariance;
};

/// Everything one experiment needs. Loadable from a sectioned key=value file;
/// CLI flags override file values.
struct ExperimentConfig {
  // [run]
  std::string env_path;
  ctrl::PlatformMode mode = ctrl::PlatformMode::kA;
  bool merged = true;
  double duration = 600.0;  // seconds
  int n_trials = 20;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  double sim_dt = 0.01;
  double plan_period = 2.0;      // replan cadence, seconds
  double map_rebuild_period = 5.0;  // min spacing of post-closure map rebuilds
  double sample_period = 2.0;    // metric bucket window, seconds
  double fault_timeout = 5.0;    // persistent-fault failure threshold
  int jobs = 1;                  // concurrent trials in a batch

  // [env]
  double env_resolution = 0.25;
  double env_origin_x = 0.0;
  double env_origin_y = 0.0;
  double start_x = 0.0;
  double start_y = 0.0;
  double start_theta = 0.0;

  kin::KinematicParams kin;          // [kin] D, r, alpha, joint_gear
  world::WorldConfig world;          // [world]
  world::CameraModel camera;         // [cam]
  map::OccupancyParams map;          // [map]
  double map_resolution = 0.05;
  graph::NodePolicy node_policy;     // [graph]
  graph::LoopPolicy loop_policy;
  ctrl::ControllerConfig ctrl;       // [ctrl]
  EstimationConfig est;              // [est]
};

/// Parse a config file. Unknown keys and malformed lines are errors.
ExperimentConfig load_config(const std::string& path);

/// Parse config text (same format) — used by tests and defaults.
ExperimentConfig parse_config(const std::string& text);

struct CliOverrides {
  std::string env;
  std::string mode;
  std::string merged;  // "true"/"false"
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> duration;
};
void apply_overrides(ExperimentConfig& cfg, const CliOverrides& o);

}  // namespace panslam::cfg
