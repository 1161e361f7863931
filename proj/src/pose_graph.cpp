#include "panslam/pose_graph.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace panslam::graph {

namespace {

Eigen::Vector3d edge_residual(const GraphEdge& e, const Pose2D& pi,
                              const Pose2D& pj) {
  const double c = std::cos(pi.theta), s = std::sin(pi.theta);
  const double dx = pj.x - pi.x, dy = pj.y - pi.y;
  return {c * dx + s * dy - e.rel.x, -s * dx + c * dy - e.rel.y,
          wrap_pi(pj.theta - pi.theta - e.rel.theta)};
}

// Jacobians of the residual w.r.t. (xi, yi, thetai) and (xj, yj, thetaj).
void edge_jacobians(const Pose2D& pi, const Pose2D& pj, Eigen::Matrix3d& Ji,
                    Eigen::Matrix3d& Jj) {
  const double c = std::cos(pi.theta), s = std::sin(pi.theta);
  const double dx = pj.x - pi.x, dy = pj.y - pi.y;
  Ji << -c, -s, -s * dx + c * dy,
        s, -c, -c * dx - s * dy,
        0, 0, -1;
  Jj << c, s, 0,
        -s, c, 0,
        0, 0, 1;
}

}  // namespace

std::optional<int> maybe_add_node(PoseGraph& graph, const Pose2D& est_pose,
                                  std::vector<std::int32_t> cell_signature,
                                  const Eigen::Matrix3d& accumulated_cov,
                                  const NodePolicy& policy, double time,
                                  std::optional<Pose2D> true_pose) {
  std::sort(cell_signature.begin(), cell_signature.end());
  cell_signature.erase(
      std::unique(cell_signature.begin(), cell_signature.end()),
      cell_signature.end());

  if (!graph.nodes.empty()) {
    const GraphNode& last = graph.nodes.back();
    const double d = hypot2(est_pose.x - last.pose.x, est_pose.y - last.pose.y);
    const double da = std::abs(wrap_pi(est_pose.theta - last.pose.theta));
    if (d < policy.min_displacement && da < policy.min_rotation)
      return std::nullopt;
  }

  GraphNode node;
  node.id = static_cast<int>(graph.nodes.size());
  node.pose = est_pose;
  node.pose.theta = wrap_pi(est_pose.theta);
  node.time = time;
  node.signature = std::move(cell_signature);
  node.true_pose = true_pose;
  graph.nodes.push_back(std::move(node));

  if (graph.nodes.size() >= 2) {
    const GraphNode& prev = graph.nodes[graph.nodes.size() - 2];
    GraphEdge e;
    e.from = prev.id;
    e.to = graph.nodes.back().id;
    e.rel = se2_between(prev.pose, graph.nodes.back().pose);
    Eigen::Matrix3d cov = accumulated_cov;
    cov.diagonal().array() += 1e-12;  // keep invertible for tiny motion
    e.info = cov.inverse();
    e.kind = GraphEdge::Kind::kOdometry;
    graph.edges.push_back(e);
  }
  return graph.nodes.back().id;
}

double signature_overlap(const std::vector<std::int32_t>& a,
                         const std::vector<std::int32_t>& b) {
  if (a.empty() || b.empty()) return 0.0;
  std::size_t i = 0, j = 0, common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++common;
      ++i;
      ++j;
    }
  }
  return static_cast<double>(common) /
         static_cast<double>(std::min(a.size(), b.size()));
}

std::optional<GraphEdge> detect_loop_closure(const PoseGraph& graph,
                                             int node_id,
                                             const LoopPolicy& policy,
                                             std::mt19937_64& rng) {
  if (node_id < 0 || node_id >= static_cast<int>(graph.nodes.size()))
    throw std::invalid_argument("detect_loop_closure: bad node id");
  const GraphNode& cur = graph.nodes[static_cast<std::size_t>(node_id)];
  if (!cur.true_pose) return std::nullopt;

  const GraphNode* best = nullptr;
  double best_dist = policy.radius;
  for (const auto& cand : graph.nodes) {
    if (node_id - cand.id < policy.min_node_separation) continue;
    if (!cand.true_pose) continue;
    const double d = hypot2(cur.pose.x - cand.pose.x, cur.pose.y - cand.pose.y);
    if (d > best_dist) continue;
    if (signature_overlap(cur.signature, cand.signature) < policy.min_overlap)
      continue;
    best = &cand;
    best_dist = d;
  }
  if (!best) return std::nullopt;

  std::normal_distribution<double> gauss(0.0, 1.0);
  const Pose2D truth = se2_between(*best->true_pose, *cur.true_pose);
  GraphEdge e;
  e.from = best->id;
  e.to = node_id;
  e.rel.x = truth.x + policy.sigma_xy * gauss(rng);
  e.rel.y = truth.y + policy.sigma_xy * gauss(rng);
  e.rel.theta = wrap_pi(truth.theta + policy.sigma_theta * gauss(rng));
  Eigen::Vector3d var(policy.sigma_xy * policy.sigma_xy,
                      policy.sigma_xy * policy.sigma_xy,
                      policy.sigma_theta * policy.sigma_theta);
  e.info = var.cwiseInverse().asDiagonal();
  e.kind = GraphEdge::Kind::kLoop;
  return e;
}

double graph_chi2(const PoseGraph& graph, const std::vector<Pose2D>& poses) {
  double chi2 = 0.0;
  for (const auto& e : graph.edges) {
    const Eigen::Vector3d r =
        edge_residual(e, poses[static_cast<std::size_t>(e.from)],
                      poses[static_cast<std::size_t>(e.to)]);
    chi2 += r.dot(e.info * r);
  }
  return chi2;
}

OptimizeResult optimize_graph(const PoseGraph& graph, int max_iter, double tol) {
  OptimizeResult out;
  out.poses.reserve(graph.nodes.size());
  for (const auto& n : graph.nodes) out.poses.push_back(n.pose);
  if (graph.nodes.size() < 2 || graph.edges.empty()) {
    out.chi2_initial = out.chi2_final = graph_chi2(graph, out.poses);
    return out;
  }

  const int n_free = static_cast<int>(graph.nodes.size()) - 1;  // node 0 fixed
  double chi2 = graph_chi2(graph, out.poses);
  out.chi2_initial = chi2;

  using Trip = Eigen::Triplet<double>;
  for (int iter = 0; iter < max_iter; ++iter) {
    std::vector<Trip> trips;
    trips.reserve(graph.edges.size() * 36);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(3 * n_free);

    for (const auto& e : graph.edges) {
      const auto& pi = out.poses[static_cast<std::size_t>(e.from)];
      const auto& pj = out.poses[static_cast<std::size_t>(e.to)];
      const Eigen::Vector3d r = edge_residual(e, pi, pj);
      Eigen::Matrix3d Ji, Jj;
      edge_jacobians(pi, pj, Ji, Jj);

      const int bi = (e.from - 1) * 3;  // <0 when the fixed node
      const int bj = (e.to - 1) * 3;
      const Eigen::Matrix3d Hii = Ji.transpose() * e.info * Ji;
      const Eigen::Matrix3d Hij = Ji.transpose() * e.info * Jj;
      const Eigen::Matrix3d Hjj = Jj.transpose() * e.info * Jj;
      const Eigen::Vector3d gi = Ji.transpose() * e.info * r;
      const Eigen::Vector3d gj = Jj.transpose() * e.info * r;

      auto add_block = [&](int row0, int col0, const Eigen::Matrix3d& m) {
        for (int a = 0; a < 3; ++a)
          for (int c = 0; c < 3; ++c)
            trips.emplace_back(row0 + a, col0 + c, m(a, c));
      };
      if (bi >= 0) {
        add_block(bi, bi, Hii);
        b.segment<3>(bi) -= gi;
      }
      if (bj >= 0) {
        add_block(bj, bj, Hjj);
        b.segment<3>(bj) -= gj;
      }
      if (bi >= 0 && bj >= 0) {
        add_block(bi, bj, Hij);
        add_block(bj, bi, Hij.transpose());
      }
    }

    Eigen::SparseMatrix<double> H(3 * n_free, 3 * n_free);
    H.setFromTriplets(trips.begin(), trips.end());

    // Try undamped Gauss-Newton first, escalate Levenberg damping until the
    // step both solves and does not increase chi2.
    double lambda = 0.0;
    bool accepted = false;
    Eigen::VectorXd dx;
    std::vector<Pose2D> trial;
    for (int attempt = 0; attempt < 12 && !accepted; ++attempt) {
      Eigen::SparseMatrix<double> Hd = H;
      if (lambda > 0.0) {
        for (int k = 0; k < Hd.rows(); ++k) Hd.coeffRef(k, k) += lambda;
      }
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Hd);
      if (solver.info() == Eigen::Success) {
        dx = solver.solve(b);
        if (solver.info() == Eigen::Success && dx.allFinite()) {
          trial = out.poses;
          for (int k = 0; k < n_free; ++k) {
            trial[static_cast<std::size_t>(k + 1)].x += dx(3 * k);
            trial[static_cast<std::size_t>(k + 1)].y += dx(3 * k + 1);
            trial[static_cast<std::size_t>(k + 1)].theta =
                wrap_pi(trial[static_cast<std::size_t>(k + 1)].theta + dx(3 * k + 2));
          }
          const double trial_chi2 = graph_chi2(graph, trial);
          if (trial_chi2 <= chi2 + 1e-12) {
            accepted = true;
            chi2 = trial_chi2;
            out.poses = std::move(trial);
            break;
          }
        }
      }
      lambda = (lambda == 0.0) ? 1e-6 : lambda * 10.0;
      if (lambda > 1e10)
        throw std::runtime_error("optimize_graph: singular normal equations");
    }
    ++out.iterations;
    if (!accepted) break;  // no improving step available: converged
    if (dx.size() == 0 || dx.cwiseAbs().maxCoeff() < tol) break;
  }

  out.chi2_final = chi2;
  return out;
}

}  // namespace panslam::graph
