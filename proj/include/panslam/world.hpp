#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "panslam/environment.hpp"
#include "panslam/geometry.hpp"
#include "panslam/kinematics.hpp"

namespace panslam::world {

/// Camera sector model: horizontal field of view and depth cutoff.
struct CameraModel {
  double fov = deg2rad(69.4);
  double max_depth = 4.0;
  double ray_step = deg2rad(0.5);  // max angular spacing between rays

  void validate() const;
};

struct NoiseConfig {
  double sigma_gyro = 0.01;      // rad/s, both IMUs
  double odom_a_t = 0.02;        // translational scale term
  double odom_b_t = 0.001;       // m, translational floor
  double odom_a_r = 0.02;        // rotational scale term
  double odom_b_r = 0.0005;      // rad, rotational floor
  double sigma_wheel_vel = 0.02; // m/s resp. rad/s on wheel-derived twist
  double encoder_tick = deg2rad(0.5);  // rad per encoder tick
};

struct WorldConfig {
  double lrf_max_range = 12.0;
  double robot_radius = 0.2;
  NoiseConfig noise;
};

/// Ground-truth robot + camera state.
struct TrueState {
  Pose2D pose;                 // x_R
  double gamma = 0.0;          // camera yaw relative to base, wrapped
  GlobalVelocity twist;        // executed world-frame base twist
  double dgamma = 0.0;         // executed joint rate
  double time = 0.0;

  double psi() const { return wrap_pi(pose.theta + gamma); }
};

/// One camera ray, relative to the camera's world heading at sensing time.
struct CamRay {
  double rel_angle = 0.0;  // offset from psi
  double range = 0.0;      // hit distance, or max_depth when no hit
  bool hit = false;
};

/// Map-grid cell touched by a camera ray.
struct CameraHit {
  int ix = 0;
  int iy = 0;
  bool occupied = false;
};

/// Everything the estimation stack receives per control step.
struct SensorFrame {
  double time = 0.0;
  std::vector<double> lrf_ranges;       // 360 rays, 1 degree apart
  std::vector<CameraHit> camera_hits;   // ground-truth projected cells
  std::vector<CamRay> cam_rays;         // polar form for estimate-side mapping
  double imu_base_gyro = 0.0;           // rad/s
  double imu_cam_gyro = 0.0;            // rad/s
  long long encoder_ticks = 0;
  Pose2D odom_delta;                    // scan-match surrogate, prev body frame
  double odom_sigma_xy = 0.0;
  double odom_sigma_theta = 0.0;
  GlobalVelocity wheel_vel_body;        // wheel-odometry body twist
};

/// 360-ray sweep from the base pose (ray i at theta + i degrees), clamped to
/// max_range. Throws std::invalid_argument when the pose is inside a wall.
std::vector<double> raycast_lrf(const Environment& env, const Pose2D& pose,
                                double max_range);

/// Camera sector observation rasterized onto the map grid: traversed free
/// cells plus terminal occupied cells within max_depth, and the per-ray polar
/// readings. Map-cell occupancy is the environment sampled at cell centers.
struct CameraObservation {
  std::vector<CameraHit> hits;
  std::vector<CamRay> rays;
};
CameraObservation camera_observation(const Environment& env,
                                     const GridSpec& map_spec, double x,
                                     double y, double psi,
                                     const CameraModel& cam);

/// Gyro pair and joint encoder reading for the current true state.
struct InertialReadings {
  double imu_base_gyro = 0.0;
  double imu_cam_gyro = 0.0;
  long long encoder_ticks = 0;
};
InertialReadings synthesize_inertial_and_encoder(const TrueState& s,
                                                 const NoiseConfig& noise,
                                                 std::mt19937_64& rng);

/// Relative-pose odometry surrogate with motion-proportional noise. The
/// reported sigmas are exactly the sampling sigmas.
struct OdomDelta {
  Pose2D delta;
  double sigma_xy = 0.0;
  double sigma_theta = 0.0;
};
OdomDelta scan_match_odometry(const Pose2D& prev, const Pose2D& curr,
                              const NoiseConfig& noise, std::mt19937_64& rng);

/// Ground-truth world for one trial: owns the environment, the true state,
/// the wheel-rotation and path-length accumulators, and the sensor rng.
class World {
 public:
  World(Environment env, WorldConfig cfg, kin::KinematicParams kin,
        CameraModel cam, const Pose2D& start, double gamma0,
        std::uint64_t seed);

  /// Advance one simulation substep under a wheel command. Translation is
  /// truncated at obstacle contact (bisected, never penetrating); rotations
  /// always execute. Returns false when the commanded translation was
  /// blocked this substep.
  bool step(const kin::WheelCommand& cmd, double dt);

  /// Produce the full sensor frame at the current state. Odometry is measured
  /// against the pose at the previous sense() call.
  SensorFrame sense(const GridSpec& map_spec);

  const TrueState& state() const { return state_; }
  const Environment& environment() const { return env_; }
  const CameraModel& camera() const { return cam_; }
  const WorldConfig& config() const { return cfg_; }
  double wheel_rotation() const { return wheel_rotation_; }
  double path_length() const { return path_length_; }
  bool had_contact() const { return had_contact_; }

 private:
  Environment env_;
  WorldConfig cfg_;
  kin::KinematicParams kin_;
  CameraModel cam_;
  TrueState state_;
  Pose2D last_sense_pose_;
  std::mt19937_64 rng_;
  double wheel_rotation_ = 0.0;
  double path_length_ = 0.0;
  bool had_contact_ = false;
};

}  // namespace panslam::world
