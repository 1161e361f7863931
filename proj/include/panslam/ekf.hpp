#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace panslam::est {

/// Mean + covariance container shared by every filter output.
struct GaussianEstimate {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Motion model for ekf_predict. `noise_rate` is a covariance rate: the
/// per-step process noise is noise_rate * dt. angle_states are wrapped to
/// (-pi, pi] after propagation and after updates.
struct ProcessModel {
  std::function<Eigen::VectorXd(const Eigen::VectorXd&, double)> propagate;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&, double)> jacobian;
  Eigen::MatrixXd noise_rate;
  std::vector<int> angle_states;
};

/// cov' = F cov F^T + Q, mean through the motion model. Throws when the
/// propagated covariance is not PSD after symmetrization.
GaussianEstimate ekf_predict(const GaussianEstimate& est,
                             const ProcessModel& model, double dt);

/// Joseph-form Kalman update. Rows of the innovation listed in angle_rows are
/// wrapped; state entries in angle_states are wrapped after the update.
/// Throws when the innovation covariance is singular.
GaussianEstimate ekf_update(const GaussianEstimate& est,
                            const Eigen::VectorXd& z, const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R,
                            const std::vector<int>& angle_rows = {},
                            const std::vector<int>& angle_states = {});

/// Loop-closure refinement restricted to the x, y components: the Kalman gain
/// rows of every other state are zeroed, so the heading (and the rest of the
/// state) is untouched; Joseph form keeps the covariance PSD for the masked
/// gain.
GaussianEstimate fuse_loop_closure_xy(const GaussianEstimate& est,
                                      const Eigen::Vector2d& corrected_xy,
                                      const Eigen::Matrix2d& cov_xy);

/// Planar base model, state [x, y, theta, vx_body, vy_body, dtheta].
ProcessModel unicycle_lateral_model(double q_pos, double q_theta, double q_vel,
                                    double q_omega);

/// Camera joint model, state [gamma, dgamma].
ProcessModel constant_rate_model(double q_angle, double q_rate);

/// Identity motion with isotropic noise rate q, n states.
ProcessModel static_model(int n, double q);

/// True when cov is symmetric PSD within tolerance.
bool is_psd(const Eigen::MatrixXd& cov, double tol = 1e-9);

}  // namespace panslam::est
