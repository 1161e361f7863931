#include "panslam/ekf.hpp"

#include <stdexcept>

#include "panslam/angles.hpp"

namespace panslam::est {

namespace {

void wrap_states(Eigen::VectorXd& mean, const std::vector<int>& idx) {
  for (int i : idx) mean(i) = wrap_pi(mean(i));
}

}  // namespace

bool is_psd(const Eigen::MatrixXd& cov, double tol) {
  if (cov.rows() != cov.cols()) return false;
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > tol) return false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  return es.info() == Eigen::Success && es.eigenvalues().minCoeff() >= -tol;
}

GaussianEstimate ekf_predict(const GaussianEstimate& est,
                             const ProcessModel& model, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("ekf_predict: dt must be > 0");
  GaussianEstimate out;
  out.mean = model.propagate(est.mean, dt);
  wrap_states(out.mean, model.angle_states);
  const Eigen::MatrixXd F = model.jacobian(est.mean, dt);
  out.cov = F * est.cov * F.transpose() + model.noise_rate * dt;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  if (!is_psd(out.cov))
    throw std::runtime_error("ekf_predict: covariance lost positive semidefiniteness");
  return out;
}

GaussianEstimate ekf_update(const GaussianEstimate& est,
                            const Eigen::VectorXd& z, const Eigen::MatrixXd& H,
                            const Eigen::MatrixXd& R,
                            const std::vector<int>& angle_rows,
                            const std::vector<int>& angle_states) {
  Eigen::VectorXd innov = z - H * est.mean;
  for (int r : angle_rows) innov(r) = wrap_pi(innov(r));

  const Eigen::MatrixXd S = H * est.cov * H.transpose() + R;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      ldlt.vectorD().minCoeff() <= 0.0)
    throw std::runtime_error("ekf_update: singular innovation covariance");

  const Eigen::MatrixXd K = ldlt.solve(H * est.cov).transpose();
  GaussianEstimate out;
  out.mean = est.mean + K * innov;
  wrap_states(out.mean, angle_states);
  const Eigen::MatrixXd IKH =
      Eigen::MatrixXd::Identity(est.mean.size(), est.mean.size()) - K * H;
  out.cov = IKH * est.cov * IKH.transpose() + K * R * K.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

GaussianEstimate fuse_loop_closure_xy(const GaussianEstimate& est,
                                      const Eigen::Vector2d& corrected_xy,
                                      const Eigen::Matrix2d& cov_xy) {
  const auto n = est.mean.size();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, n);
  H(0, 0) = 1.0;
  H(1, 1) = 1.0;

  const Eigen::Vector2d innov = corrected_xy - est.mean.head<2>();
  const Eigen::Matrix2d S = (H * est.cov * H.transpose() + cov_xy);
  Eigen::LDLT<Eigen::Matrix2d> ldlt(S);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 0.0)
    throw std::runtime_error("fuse_loop_closure_xy: singular innovation");

  Eigen::MatrixXd K = ldlt.solve((H * est.cov)).transpose();
  K.bottomRows(n - 2).setZero();  // only x,y may move

  GaussianEstimate out;
  out.mean = est.mean + K * innov;
  const Eigen::MatrixXd IKH = Eigen::MatrixXd::Identity(n, n) - K * H;
  out.cov = IKH * est.cov * IKH.transpose() + K * cov_xy * K.transpose();
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

ProcessModel unicycle_lateral_model(double q_pos, double q_theta, double q_vel,
                                    double q_omega) {
  ProcessModel m;
  m.propagate = [](const Eigen::VectorXd& x, double dt) {
    Eigen::VectorXd out = x;
    const double c = std::cos(x(2)), s = std::sin(x(2));
    out(0) += (x(3) * c - x(4) * s) * dt;
    out(1) += (x(3) * s + x(4) * c) * dt;
    out(2) += x(5) * dt;
    return out;
  };
  m.jacobian = [](const Eigen::VectorXd& x, double dt) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Identity(6, 6);
    const double c = std::cos(x(2)), s = std::sin(x(2));
    F(0, 2) = (-x(3) * s - x(4) * c) * dt;
    F(0, 3) = c * dt;
    F(0, 4) = -s * dt;
    F(1, 2) = (x(3) * c - x(4) * s) * dt;
    F(1, 3) = s * dt;
    F(1, 4) = c * dt;
    F(2, 5) = dt;
    return F;
  };
  Eigen::VectorXd q(6);
  q << q_pos, q_pos, q_theta, q_vel, q_vel, q_omega;
  m.noise_rate = q.asDiagonal();
  m.angle_states = {2};
  return m;
}

ProcessModel constant_rate_model(double q_angle, double q_rate) {
  ProcessModel m;
  m.propagate = [](const Eigen::VectorXd& x, double dt) {
    Eigen::VectorXd out = x;
    out(0) += x(1) * dt;
    return out;
  };
  m.jacobian = [](const Eigen::VectorXd&, double dt) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Identity(2, 2);
    F(0, 1) = dt;
    return F;
  };
  Eigen::VectorXd q(2);
  q << q_angle, q_rate;
  m.noise_rate = q.asDiagonal();
  m.angle_states = {0};
  return m;
}

ProcessModel static_model(int n, double q) {
  ProcessModel m;
  m.propagate = [](const Eigen::VectorXd& x, double) { return x; };
  m.jacobian = [n](const Eigen::VectorXd&, double) {
    return Eigen::MatrixXd::Identity(n, n);
  };
  m.noise_rate = q * Eigen::MatrixXd::Identity(n, n);
  return m;
}

}  // namespace panslam::est
