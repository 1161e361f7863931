#pragma once

#include <array>
#include <optional>

#include "panslam/geometry.hpp"

namespace panslam::kin {

/// Geometry of the three-wheel omnidirectional base plus the camera joint.
///
/// wheel_angles are the angular positions of the wheel contact points on the
/// chassis. For the default symmetric layout {0, 2pi/3, 4pi/3} the stored
/// sin/cos pairs are snapped to exactly symmetric doubles so that the wheel
/// unit rows sum to zero bit-exactly.
struct KinematicParams {
  double wheel_center_distance = 0.135;  // D, meters (Robotino-class)
  double wheel_radius = 0.04;            // r, meters
  std::array<double, 3> wheel_angles = {0.0, 2.0 * kPi / 3.0, 4.0 * kPi / 3.0};
  double joint_gear_ratio = 1.0;
  double wheel_omega_limit = 60.0;  // rad/s actuator bound per wheel

  KinematicParams() { finalize(); }

  /// Validates invariants and precomputes trig rows and the inverse wheel
  /// matrix. Throws std::invalid_argument when the geometry is degenerate.
  void finalize();

  // Precomputed per-wheel direction rows of S_L: row_i = (-sin a_i, cos a_i, D).
  std::array<double, 3> sin_a{};
  std::array<double, 3> cos_a{};
  // Inverse of S_L, row-major; maps wheel rim speeds to body twist.
  std::array<double, 9> s_inv{};
};

/// Base wheel speeds, optionally with the camera joint speed.
struct WheelCommand {
  std::array<double, 3> omega = {0.0, 0.0, 0.0};  // rad/s
  std::optional<double> omega_joint;              // rad/s, extended form only

  bool finite() const;
};

/// Wheel speeds for a world-frame base twist: omega = G * S_L * T_R(theta) * v.
WheelCommand wheel_speeds(double theta, const GlobalVelocity& v,
                          const KinematicParams& p);

/// Extended map including the camera joint. Base wheels match wheel_speeds on
/// (vx, vy, dtheta); the joint row transfers the base rotation through the
/// joint: omega_joint = gear * (dtheta + dgamma).
WheelCommand extended_wheel_speeds(double theta, const ExtendedVelocity& v,
                                   const KinematicParams& p);

/// Body twist realized by the given wheel speeds (inverse of wheel_speeds in
/// the body frame): (bx, by, dtheta) = r * S_L^-1 * omega.
GlobalVelocity body_velocity_from_wheels(const WheelCommand& w,
                                         const KinematicParams& p);

/// Explicit Euler step of the base pose and camera angle in the world frame.
/// Both returned angles are wrapped to (-pi, pi]. dt must be positive.
std::pair<Pose2D, double> integrate_pose(const Pose2D& x,
                                         const GlobalVelocity& v, double gamma,
                                         double dgamma, double dt);

/// acc + sum_i |omega_i| * dt over the base wheels (joint excluded).
double accumulate_wheel_rotation(const WheelCommand& w, double dt, double acc);

}  // namespace panslam::kin
