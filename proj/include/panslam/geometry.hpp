#pragma once

#include <cmath>

#include "panslam/angles.hpp"

namespace panslam {

/// Planar pose [x, y, theta] in the world frame. theta kept in (-pi, pi].
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
};

/// World-frame base twist (vx, vy, dtheta).
struct GlobalVelocity {
  double vx = 0.0;
  double vy = 0.0;
  double dtheta = 0.0;

  bool finite() const {
    return std::isfinite(vx) && std::isfinite(vy) && std::isfinite(dtheta);
  }
};

/// World-frame twist extended with the camera joint rate.
struct ExtendedVelocity {
  double vx = 0.0;
  double vy = 0.0;
  double dtheta = 0.0;
  double dgamma = 0.0;

  GlobalVelocity base() const { return {vx, vy, dtheta}; }
  bool finite() const {
    return std::isfinite(vx) && std::isfinite(vy) && std::isfinite(dtheta) &&
           std::isfinite(dgamma);
  }
};

/// a ∘ b: pose of frame b expressed in a's parent frame.
inline Pose2D se2_compose(const Pose2D& a, const Pose2D& b) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  return {a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y,
          wrap_pi(a.theta + b.theta)};
}

/// a⁻¹ ∘ b: pose of b expressed in a's frame.
inline Pose2D se2_between(const Pose2D& a, const Pose2D& b) {
  const double c = std::cos(a.theta), s = std::sin(a.theta);
  const double dx = b.x - a.x, dy = b.y - a.y;
  return {c * dx + s * dy, -s * dx + c * dy, wrap_pi(b.theta - a.theta)};
}

inline double hypot2(double x, double y) { return std::sqrt(x * x + y * y); }

}  // namespace panslam
