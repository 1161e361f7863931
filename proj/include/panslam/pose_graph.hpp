#pragma once

#include <Eigen/Dense>
#include <optional>
#include <random>
#include <vector>

#include "panslam/geometry.hpp"

namespace panslam::graph {

struct GraphNode {
  int id = 0;
  Pose2D pose;                       // estimated [x y theta], theta wrapped
  double time = 0.0;
  std::vector<std::int32_t> signature;  // sorted unique map cells seen here
  std::optional<Pose2D> true_pose;   // ground truth, loop surrogate only
};

struct GraphEdge {
  enum class Kind { kOdometry, kLoop };
  int from = 0;
  int to = 0;
  Pose2D rel;               // measured pose of `to` in `from`'s frame
  Eigen::Matrix3d info = Eigen::Matrix3d::Identity();
  Kind kind = Kind::kOdometry;
};

struct PoseGraph {
  std::vector<GraphNode> nodes;
  std::vector<GraphEdge> edges;
};

struct NodePolicy {
  double min_displacement = 0.3;  // m
  double min_rotation = 0.3;      // rad
};

struct LoopPolicy {
  int min_node_separation = 20;
  double radius = 1.0;          // m, estimated distance gate
  double min_overlap = 0.5;     // signature overlap fraction
  double sigma_xy = 0.02;       // m, loop measurement noise
  double sigma_theta = 0.01;    // rad
};

/// Insert a node when the pose moved far enough from the last node (the first
/// call always inserts). Adds the odometry edge with information equal to the
/// inverse of the accumulated relative covariance. Returns the new node id.
std::optional<int> maybe_add_node(PoseGraph& graph, const Pose2D& est_pose,
                                  std::vector<std::int32_t> cell_signature,
                                  const Eigen::Matrix3d& accumulated_cov,
                                  const NodePolicy& policy, double time,
                                  std::optional<Pose2D> true_pose);

/// |A ∩ B| / min(|A|, |B|) over sorted signatures; 0 when either is empty.
double signature_overlap(const std::vector<std::int32_t>& a,
                         const std::vector<std::int32_t>& b);

/// Loop surrogate: among nodes at least min_node_separation ids older and
/// within `radius` of the current estimate, require signature overlap and
/// emit one edge whose relative pose is the ground-truth one plus sampled
/// noise; its information is the inverse of that noise covariance.
std::optional<GraphEdge> detect_loop_closure(const PoseGraph& graph,
                                             int node_id,
                                             const LoopPolicy& policy,
                                             std::mt19937_64& rng);

/// Gauss-Newton over SE(2) relative-pose residuals with the first node fixed.
/// Accepts only chi2-non-increasing steps, falling back to Levenberg damping;
/// stops at max_iter or when the update drops below tol. Throws when the
/// normal equations stay singular under damping.
struct OptimizeResult {
  std::vector<Pose2D> poses;
  double chi2_initial = 0.0;
  double chi2_final = 0.0;
  int iterations = 0;
};
OptimizeResult optimize_graph(const PoseGraph& graph, int max_iter = 50,
                              double tol = 1e-8);

/// Total chi2 of the graph at the given poses.
double graph_chi2(const PoseGraph& graph, const std::vector<Pose2D>& poses);

}  // namespace panslam::graph
