#pragma once

#include <Eigen/Dense>

#include "panslam/ekf.hpp"
#include "panslam/geometry.hpp"

namespace panslam::est {

/// Virtual joint-rate sensor built from the two gyros. The variance is fixed
/// by design regardless of the source variances: synchronization slack and
/// gyro spikes dominate, so the plain sum would be overconfident.
struct DifferentialImuMeasurement {
  double rel_rate = 0.0;   // rad/s
  double variance = 0.01;  // rad^2/s^2, fixed
};

inline constexpr double kDifferentialImuVariance = 0.01;
inline constexpr double kSyncToleranceSec = 0.005;

/// rel_rate = cam_gyro - base_gyro. Throws when the two samples are farther
/// apart than `tol` seconds.
DifferentialImuMeasurement differential_imu(double base_gyro, double base_time,
                                            double cam_gyro, double cam_time,
                                            double tol = kSyncToleranceSec);

/// An estimate tagged with its sample time.
struct StampedEstimate {
  double time = 0.0;
  GaussianEstimate est;
};

/// Linear interpolation of the mean, nearest-neighbor covariance.
StampedEstimate interpolate_estimate(const StampedEstimate& a,
                                     const StampedEstimate& b, double t);

/// Composed robot+camera state [x, y, psi, vx, vy, dpsi] handed to the SLAM
/// layer. psi = theta + gamma with the variances summed; the camera
/// contributes only to the psi and dpsi diagonal entries.
struct MergedState {
  double time = 0.0;
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double dpsi = 0.0;
  Eigen::Matrix<double, 6, 6> cov = Eigen::Matrix<double, 6, 6>::Zero();

  Pose2D pose() const { return {x, y, psi}; }
  double var_psi() const { return cov(2, 2); }
};

/// Merge the robot estimate [x y theta vx vy dtheta] with the camera estimate
/// [gamma dgamma]. Throws when the stamps differ by more than `tol`.
MergedState merge_states(const StampedEstimate& robot,
                         const StampedEstimate& camera,
                         double tol = kSyncToleranceSec);

/// Baseline composition that takes the camera angle as ground truth: the
/// raw encoder angle and differential-IMU rate are summed in with zero
/// added uncertainty.
MergedState compose_unmerged(const StampedEstimate& robot, double gamma_raw,
                             double dgamma_raw);

}  // namespace panslam::est
