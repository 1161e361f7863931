#include "panslam/world.hpp"

#include <cmath>
#include <stdexcept>

#include "panslam/raycast.hpp"

namespace panslam::world {

void CameraModel::validate() const {
  if (!(fov > 0.0) || !(fov < kTwoPi))
    throw std::invalid_argument("camera: fov must be in (0, 2pi)");
  if (!(max_depth > 0.0))
    throw std::invalid_argument("camera: max_depth must be > 0");
  if (!(ray_step > 0.0))
    throw std::invalid_argument("camera: ray_step must be > 0");
}

std::vector<double> raycast_lrf(const Environment& env, const Pose2D& pose,
                                double max_range) {
  if (env.occupied_at(pose.x, pose.y))
    throw std::invalid_argument("raycast_lrf: pose inside an obstacle");
  std::vector<double> out(360);
  for (int i = 0; i < 360; ++i) {
    const double a = pose.theta + deg2rad(static_cast<double>(i));
    const RayHit h = cast_ray(env.spec, pose.x, pose.y, a, max_range,
                              [&](int ix, int iy) { return env.occupied_cell(ix, iy); });
    out[static_cast<std::size_t>(i)] = h.hit ? h.distance : max_range;
  }
  return out;
}

CameraObservation camera_observation(const Environment& env,
                                     const GridSpec& map_spec, double x,
                                     double y, double psi,
                                     const CameraModel& cam) {
  if (env.occupied_at(x, y))
    throw std::invalid_argument("camera_observation: pose inside an obstacle");

  CameraObservation obs;
  const int spans = std::max(1, static_cast<int>(std::ceil(cam.fov / cam.ray_step - 1e-12)));
  const int n_rays = spans + 1;
  obs.rays.reserve(static_cast<std::size_t>(n_rays));

  auto map_occupied = [&](int ix, int iy) {
    return env.occupied_at(map_spec.center_x(ix), map_spec.center_y(iy));
  };

  for (int k = 0; k < n_rays; ++k) {
    const double rel = -cam.fov / 2.0 + cam.fov * k / spans;
    const double a = psi + rel;
    const double dx = std::cos(a), dy = std::sin(a);
    std::vector<CameraHit> ray_cells;
    const RayHit h = walk_ray(map_spec, x, y, dx, dy, cam.max_depth,
                              [&](int ix, int iy, double) {
                                if (map_occupied(ix, iy)) return RayStep::kStop;
                                ray_cells.push_back({ix, iy, false});
                                return RayStep::kContinue;
                              });
    for (const auto& c : ray_cells) obs.hits.push_back(c);
    if (h.hit) obs.hits.push_back({h.ix, h.iy, true});
    obs.rays.push_back({rel, h.hit ? h.distance : cam.max_depth, h.hit});
  }
  return obs;
}

InertialReadings synthesize_inertial_and_encoder(const TrueState& s,
                                                 const NoiseConfig& noise,
                                                 std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  InertialReadings r;
  r.imu_base_gyro = s.twist.dtheta + noise.sigma_gyro * gauss(rng);
  r.imu_cam_gyro = s.twist.dtheta + s.dgamma + noise.sigma_gyro * gauss(rng);
  r.encoder_ticks = std::llround(s.gamma / noise.encoder_tick);
  return r;
}

OdomDelta scan_match_odometry(const Pose2D& prev, const Pose2D& curr,
                              const NoiseConfig& noise, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const Pose2D d = se2_between(prev, curr);
  OdomDelta out;
  out.sigma_xy = noise.odom_a_t * hypot2(d.x, d.y) + noise.odom_b_t;
  out.sigma_theta = noise.odom_a_r * std::abs(d.theta) + noise.odom_b_r;
  out.delta.x = d.x + out.sigma_xy * gauss(rng);
  out.delta.y = d.y + out.sigma_xy * gauss(rng);
  out.delta.theta = wrap_pi(d.theta + out.sigma_theta * gauss(rng));
  return out;
}

World::World(Environment env, WorldConfig cfg, kin::KinematicParams kin,
             CameraModel cam, const Pose2D& start, double gamma0,
             std::uint64_t seed)
    : env_(std::move(env)),
      cfg_(cfg),
      kin_(kin),
      cam_(cam),
      rng_(seed) {
  cam_.validate();
  validate_start(env_, start.x, start.y, cfg_.robot_radius);
  state_.pose = start;
  state_.pose.theta = wrap_pi(start.theta);
  state_.gamma = wrap_pi(gamma0);
  last_sense_pose_ = state_.pose;
}

bool World::step(const kin::WheelCommand& cmd, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("world: dt must be > 0");
  if (!cmd.finite()) throw std::invalid_argument("world: non-finite command");
  for (double w : cmd.omega)
    if (std::abs(w) > kin_.wheel_omega_limit)
      throw std::invalid_argument("world: wheel command exceeds actuator limit");

  // Inverse of the wheel map: desired body twist, then world frame.
  const GlobalVelocity body = kin::body_velocity_from_wheels(cmd, kin_);
  const double c = std::cos(state_.pose.theta), s = std::sin(state_.pose.theta);
  GlobalVelocity vel{c * body.vx - s * body.vy, s * body.vx + c * body.vy,
                     body.dtheta};
  const double dgamma =
      cmd.omega_joint ? (*cmd.omega_joint / kin_.joint_gear_ratio - body.dtheta)
                      : 0.0;

  // Translate with contact truncation; rotation always executes.
  const double tx = state_.pose.x + vel.vx * dt;
  const double ty = state_.pose.y + vel.vy * dt;
  bool moved_fully = true;
  double fx = tx, fy = ty;
  if (disc_collides(env_, tx, ty, cfg_.robot_radius)) {
    moved_fully = false;
    double lo = 0.0, hi = 1.0;  // lo always collision-free
    for (int it = 0; it < 40; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double mx = state_.pose.x + vel.vx * dt * mid;
      const double my = state_.pose.y + vel.vy * dt * mid;
      if (disc_collides(env_, mx, my, cfg_.robot_radius))
        hi = mid;
      else
        lo = mid;
    }
    fx = state_.pose.x + vel.vx * dt * lo;
    fy = state_.pose.y + vel.vy * dt * lo;
    vel.vx *= lo;
    vel.vy *= lo;
    if (hypot2(body.vx, body.vy) > 1e-12) had_contact_ = true;
  }

  path_length_ += hypot2(fx - state_.pose.x, fy - state_.pose.y);
  state_.pose.x = fx;
  state_.pose.y = fy;
  state_.pose.theta = wrap_pi(state_.pose.theta + vel.dtheta * dt);
  state_.gamma = wrap_pi(state_.gamma + dgamma * dt);
  state_.twist = vel;
  state_.dgamma = dgamma;
  state_.time += dt;

  // Executed wheel rotation (wheels cannot slip, so truncation scales them).
  const kin::WheelCommand executed =
      kin::wheel_speeds(state_.pose.theta, vel, kin_);
  wheel_rotation_ = kin::accumulate_wheel_rotation(executed, dt, wheel_rotation_);
  return moved_fully;
}

SensorFrame World::sense(const GridSpec& map_spec) {
  SensorFrame f;
  f.time = state_.time;
  f.lrf_ranges = raycast_lrf(env_, state_.pose, cfg_.lrf_max_range);
  CameraObservation obs =
      camera_observation(env_, map_spec, state_.pose.x, state_.pose.y,
                         state_.psi(), cam_);
  f.camera_hits = std::move(obs.hits);
  f.cam_rays = std::move(obs.rays);

  const InertialReadings ir =
      synthesize_inertial_and_encoder(state_, cfg_.noise, rng_);
  f.imu_base_gyro = ir.imu_base_gyro;
  f.imu_cam_gyro = ir.imu_cam_gyro;
  f.encoder_ticks = ir.encoder_ticks;

  const OdomDelta od =
      scan_match_odometry(last_sense_pose_, state_.pose, cfg_.noise, rng_);
  f.odom_delta = od.delta;
  f.odom_sigma_xy = od.sigma_xy;
  f.odom_sigma_theta = od.sigma_theta;
  last_sense_pose_ = state_.pose;

  std::normal_distribution<double> gauss(0.0, 1.0);
  const double c = std::cos(state_.pose.theta), s = std::sin(state_.pose.theta);
  f.wheel_vel_body = {
      c * state_.twist.vx + s * state_.twist.vy + cfg_.noise.sigma_wheel_vel * gauss(rng_),
      -s * state_.twist.vx + c * state_.twist.vy + cfg_.noise.sigma_wheel_vel * gauss(rng_),
      state_.twist.dtheta + cfg_.noise.sigma_wheel_vel * gauss(rng_)};
  return f;
}

}  // namespace panslam::world
