#include "panslam/kinematics.hpp"

#include <cmath>
#include <stdexcept>

namespace panslam::kin {

namespace {

constexpr double kSnapTol = 1e-12;

// sin/cos of a wheel angle, snapped to exact values at the multiples of pi/3
// used by the symmetric default layout. Keeps opposite wheels exactly
// opposite so translation rows cancel bit-for-bit.
void snapped_trig(double a, double& s, double& c) {
  const double sqrt3_2 = std::sqrt(3.0) / 2.0;
  struct Snap {
    double angle, s, c;
  };
  const Snap table[] = {
      {0.0, 0.0, 1.0},
      {kPi / 3.0, sqrt3_2, 0.5},
      {2.0 * kPi / 3.0, sqrt3_2, -0.5},
      {kPi, 0.0, -1.0},
      {4.0 * kPi / 3.0, -sqrt3_2, -0.5},
      {5.0 * kPi / 3.0, -sqrt3_2, 0.5},
      {2.0 * kPi, 0.0, 1.0},
  };
  for (const auto& t : table) {
    if (std::abs(a - t.angle) < kSnapTol) {
      s = t.s;
      c = t.c;
      return;
    }
  }
  s = std::sin(a);
  c = std::cos(a);
}

}  // namespace

void KinematicParams::finalize() {
  if (!(wheel_center_distance > 0.0) || !std::isfinite(wheel_center_distance))
    throw std::invalid_argument("kinematics: wheel_center_distance must be > 0");
  if (!(wheel_radius > 0.0) || !std::isfinite(wheel_radius))
    throw std::invalid_argument("kinematics: wheel_radius must be > 0");
  if (!(joint_gear_ratio > 0.0) || !std::isfinite(joint_gear_ratio))
    throw std::invalid_argument("kinematics: joint_gear_ratio must be > 0");

  for (int i = 0; i < 3; ++i) snapped_trig(wheel_angles[i], sin_a[i], cos_a[i]);

  // S_L rows: (-sin a_i, cos a_i, D)
  const double D = wheel_center_distance;
  const double m[9] = {-sin_a[0], cos_a[0], D, -sin_a[1], cos_a[1], D,
                       -sin_a[2], cos_a[2], D};
  const double det = m[0] * (m[4] * m[8] - m[5] * m[7]) -
                     m[1] * (m[3] * m[8] - m[5] * m[6]) +
                     m[2] * (m[3] * m[7] - m[4] * m[6]);
  if (std::abs(det) < 1e-9)
    throw std::invalid_argument(
        "kinematics: wheel angles make the wheel matrix singular");
  const double inv_det = 1.0 / det;
  s_inv[0] = (m[4] * m[8] - m[5] * m[7]) * inv_det;
  s_inv[1] = (m[2] * m[7] - m[1] * m[8]) * inv_det;
  s_inv[2] = (m[1] * m[5] - m[2] * m[4]) * inv_det;
  s_inv[3] = (m[5] * m[6] - m[3] * m[8]) * inv_det;
  s_inv[4] = (m[0] * m[8] - m[2] * m[6]) * inv_det;
  s_inv[5] = (m[2] * m[3] - m[0] * m[5]) * inv_det;
  s_inv[6] = (m[3] * m[7] - m[4] * m[6]) * inv_det;
  s_inv[7] = (m[1] * m[6] - m[0] * m[7]) * inv_det;
  s_inv[8] = (m[0] * m[4] - m[1] * m[3]) * inv_det;
}

bool WheelCommand::finite() const {
  for (double w : omega)
    if (!std::isfinite(w)) return false;
  return !omega_joint || std::isfinite(*omega_joint);
}

WheelCommand wheel_speeds(double theta, const GlobalVelocity& v,
                          const KinematicParams& p) {
  if (!std::isfinite(theta) || !v.finite())
    throw std::invalid_argument("wheel_speeds: non-finite input");

  // Body twist: T_R(theta) * v.
  const double ct = std::cos(theta), st = std::sin(theta);
  const double bx = ct * v.vx + st * v.vy;
  const double by = -st * v.vx + ct * v.vy;

  WheelCommand out;
  const double inv_r = 1.0 / p.wheel_radius;
  for (int i = 0; i < 3; ++i) {
    out.omega[i] =
        (-p.sin_a[i] * bx + p.cos_a[i] * by + p.wheel_center_distance * v.dtheta) *
        inv_r;
  }
  return out;
}

WheelCommand extended_wheel_speeds(double theta, const ExtendedVelocity& v,
                                   const KinematicParams& p) {
  if (!v.finite())
    throw std::invalid_argument("extended_wheel_speeds: non-finite input");
  WheelCommand out = wheel_speeds(theta, v.base(), p);
  out.omega_joint = p.joint_gear_ratio * (v.dtheta + v.dgamma);
  return out;
}

GlobalVelocity body_velocity_from_wheels(const WheelCommand& w,
                                         const KinematicParams& p) {
  const double r = p.wheel_radius;
  const double s0 = r * w.omega[0], s1 = r * w.omega[1], s2 = r * w.omega[2];
  return {p.s_inv[0] * s0 + p.s_inv[1] * s1 + p.s_inv[2] * s2,
          p.s_inv[3] * s0 + p.s_inv[4] * s1 + p.s_inv[5] * s2,
          p.s_inv[6] * s0 + p.s_inv[7] * s1 + p.s_inv[8] * s2};
}

std::pair<Pose2D, double> integrate_pose(const Pose2D& x,
                                         const GlobalVelocity& v, double gamma,
                                         double dgamma, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_pose: dt must be > 0");
  Pose2D out;
  out.x = x.x + v.vx * dt;
  out.y = x.y + v.vy * dt;
  out.theta = wrap_pi(x.theta + v.dtheta * dt);
  return {out, wrap_pi(gamma + dgamma * dt)};
}

double accumulate_wheel_rotation(const WheelCommand& w, double dt, double acc) {
  if (!(dt > 0.0))
    throw std::invalid_argument("accumulate_wheel_rotation: dt must be > 0");
  return acc +
         (std::abs(w.omega[0]) + std::abs(w.omega[1]) + std::abs(w.omega[2])) * dt;
}

}  // namespace panslam::kin
