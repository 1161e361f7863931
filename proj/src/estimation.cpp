#include "panslam/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace panslam::est {

DifferentialImuMeasurement differential_imu(double base_gyro, double base_time,
                                            double cam_gyro, double cam_time,
                                            double tol) {
  if (std::abs(base_time - cam_time) > tol)
    throw std::invalid_argument("differential_imu: gyro samples not synchronized");
  return {cam_gyro - base_gyro, kDifferentialImuVariance};
}

StampedEstimate interpolate_estimate(const StampedEstimate& a,
                                     const StampedEstimate& b, double t) {
  const StampedEstimate& lo = a.time <= b.time ? a : b;
  const StampedEstimate& hi = a.time <= b.time ? b : a;
  if (t <= lo.time) return lo;
  if (t >= hi.time) return hi;
  const double w = (t - lo.time) / (hi.time - lo.time);
  StampedEstimate out;
  out.time = t;
  out.est.mean = (1.0 - w) * lo.est.mean + w * hi.est.mean;
  out.est.cov = w < 0.5 ? lo.est.cov : hi.est.cov;
  return out;
}

MergedState merge_states(const StampedEstimate& robot,
                         const StampedEstimate& camera, double tol) {
  if (std::abs(robot.time - camera.time) > tol)
    throw std::invalid_argument("merge_states: estimates not time-aligned");
  if (robot.est.mean.size() != 6 || camera.est.mean.size() != 2)
    throw std::invalid_argument("merge_states: unexpected state dimensions");

  MergedState m;
  m.time = robot.time;
  m.x = robot.est.mean(0);
  m.y = robot.est.mean(1);
  m.psi = wrap_pi(robot.est.mean(2) + camera.est.mean(0));
  m.vx = robot.est.mean(3);
  m.vy = robot.est.mean(4);
  m.dpsi = robot.est.mean(5) + camera.est.mean(1);
  m.cov = robot.est.cov;
  m.cov(2, 2) += camera.est.cov(0, 0);
  m.cov(5, 5) += camera.est.cov(1, 1);
  return m;
}

MergedState compose_unmerged(const StampedEstimate& robot, double gamma_raw,
                             double dgamma_raw) {
  if (robot.est.mean.size() != 6)
    throw std::invalid_argument("compose_unmerged: unexpected state dimension");
  MergedState m;
  m.time = robot.time;
  m.x = robot.est.mean(0);
  m.y = robot.est.mean(1);
  m.psi = wrap_pi(robot.est.mean(2) + gamma_raw);
  m.vx = robot.est.mean(3);
  m.vy = robot.est.mean(4);
  m.dpsi = robot.est.mean(5) + dgamma_raw;
  m.cov = robot.est.cov;
  return m;
}

}  // namespace panslam::est
