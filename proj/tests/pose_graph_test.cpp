#include "panslam/pose_graph.hpp"

#include <gtest/gtest.h>

#include <random>

namespace panslam::graph {
namespace {

const Eigen::Matrix3d kSmallCov = 1e-4 * Eigen::Matrix3d::Identity();

std::vector<std::int32_t> sig(std::initializer_list<std::int32_t> v) {
  return std::vector<std::int32_t>(v);
}

TEST(NodePolicy_, FirstCallAlwaysInserts) {
  PoseGraph g;
  const auto id = maybe_add_node(g, {0, 0, 0}, sig({1, 2}), kSmallCov, {}, 0.0,
                                 Pose2D{0, 0, 0});
  ASSERT_TRUE(id.has_value());
  EXPECT_EQ(*id, 0);
  EXPECT_TRUE(g.edges.empty());
}

TEST(NodePolicy_, StationaryRobotAddsNothing) {
  PoseGraph g;
  maybe_add_node(g, {1, 1, 0.5}, {}, kSmallCov, {}, 0.0, std::nullopt);
  for (int i = 0; i < 50; ++i) {
    EXPECT_FALSE(maybe_add_node(g, {1.001, 1.0, 0.5}, {}, kSmallCov, {},
                                0.1 * i, std::nullopt)
                     .has_value());
  }
  EXPECT_EQ(g.nodes.size(), 1u);
}

TEST(NodePolicy_, StraightMeterYieldsFourNodes) {
  PoseGraph g;
  NodePolicy policy;  // 0.3 m threshold
  for (int i = 0; i <= 100; ++i) {
    const double x = 0.01 * i;
    maybe_add_node(g, {x, 0, 0}, {}, kSmallCov, policy, 0.01 * i, std::nullopt);
  }
  EXPECT_EQ(g.nodes.size(), 4u);  // ceil(1 / 0.3)
  EXPECT_EQ(g.edges.size(), 3u);
  for (const auto& e : g.edges) {
    EXPECT_EQ(e.kind, GraphEdge::Kind::kOdometry);
    EXPECT_NEAR(e.rel.x, 0.3, 1e-12);
  }
}

TEST(NodePolicy_, RotationSweepAddsEveryThreshold) {
  PoseGraph g;
  for (int i = 0; i <= 314; ++i)
    maybe_add_node(g, {0, 0, 0.01 * i}, {}, kSmallCov, {}, 0.01 * i,
                   std::nullopt);
  EXPECT_EQ(g.nodes.size(), 1u + 10u);  // pi / 0.3 thresholds crossed
}

TEST(NodePolicy_, OdometryEdgeInformationIsInverseCovariance) {
  PoseGraph g;
  maybe_add_node(g, {0, 0, 0}, {}, kSmallCov, {}, 0.0, std::nullopt);
  Eigen::Matrix3d cov = Eigen::Vector3d(0.01, 0.02, 0.005).asDiagonal();
  maybe_add_node(g, {1, 0, 0}, {}, cov, {}, 1.0, std::nullopt);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_NEAR(g.edges[0].info(0, 0), 1.0 / (0.01 + 1e-12), 1e-6);
  EXPECT_NEAR(g.edges[0].info(2, 2), 1.0 / (0.005 + 1e-12), 1e-6);
}

TEST(SignatureOverlap, MinNormalizedIntersection) {
  EXPECT_EQ(signature_overlap({}, {}), 0.0);
  EXPECT_EQ(signature_overlap({1, 2, 3}, {}), 0.0);
  EXPECT_EQ(signature_overlap({1, 2, 3}, {1, 2, 3}), 1.0);
  EXPECT_EQ(signature_overlap({1, 2, 3, 4}, {3, 4}), 1.0);  // subset
  EXPECT_NEAR(signature_overlap({1, 2, 3, 4}, {3, 4, 9, 10}), 0.5, 1e-15);
  EXPECT_EQ(signature_overlap({1, 2}, {3, 4}), 0.0);
}

TEST(LoopClosure, NeverFiresBeforeMinSeparation) {
  PoseGraph g;
  std::mt19937_64 rng(1);
  LoopPolicy lp;
  // 19 nodes on a tight circle, all with identical signatures.
  for (int i = 0; i < 19; ++i) {
    const double a = 0.4 * i;
    NodePolicy everything{0.0, 0.0};
    maybe_add_node(g, {0.01 * i, 0, a}, sig({1, 2, 3}), kSmallCov, everything,
                   0.1 * i, Pose2D{0.01 * i, 0, a});
  }
  for (int i = 0; i < 19; ++i)
    EXPECT_FALSE(detect_loop_closure(g, i, lp, rng).has_value());
}

TEST(LoopClosure, FiresOnRevisitWithMatchingView) {
  PoseGraph g;
  std::mt19937_64 rng(2);
  NodePolicy everything{0.0, 0.0};
  // 21 nodes: a long excursion, then return to the start with the same view.
  maybe_add_node(g, {0, 0, 0}, sig({10, 11, 12, 13}), kSmallCov, everything,
                 0.0, Pose2D{0, 0, 0});
  for (int i = 1; i < 20; ++i)
    maybe_add_node(g, {5.0 + 0.01 * i, 5.0, 0}, sig({100 + i}), kSmallCov,
                   everything, 0.1 * i, Pose2D{5.0 + 0.01 * i, 5.0, 0});
  const auto id = maybe_add_node(g, {0.1, 0.05, 0}, sig({10, 11, 12}),
                                 kSmallCov, everything, 2.0,
                                 Pose2D{0.12, 0.04, 0.01});
  ASSERT_TRUE(id.has_value());
  const auto loop = detect_loop_closure(g, *id, {}, rng);
  ASSERT_TRUE(loop.has_value());
  EXPECT_EQ(loop->from, 0);
  EXPECT_EQ(loop->to, *id);
  EXPECT_EQ(loop->kind, GraphEdge::Kind::kLoop);
  // Relative pose is the true one plus bounded noise.
  EXPECT_NEAR(loop->rel.x, 0.12, 5 * 0.02);
  EXPECT_NEAR(loop->info(0, 0), 1.0 / (0.02 * 0.02), 1e-9);
  EXPECT_NEAR(loop->info(2, 2), 1.0 / (0.01 * 0.01), 1e-9);
}

TEST(LoopClosure, LowOverlapDoesNotFire) {
  // Same spot revisited but looking the other way: disjoint signatures.
  PoseGraph g;
  std::mt19937_64 rng(3);
  NodePolicy everything{0.0, 0.0};
  maybe_add_node(g, {0, 0, 0}, sig({1, 2, 3, 4}), kSmallCov, everything, 0.0,
                 Pose2D{0, 0, 0});
  for (int i = 1; i < 21; ++i)
    maybe_add_node(g, {4.0, 4.0 + 0.01 * i, 0}, sig({50 + i}), kSmallCov,
                   everything, 0.1 * i, Pose2D{4.0, 4.0 + 0.01 * i, 0});
  const auto id =
      maybe_add_node(g, {0.05, 0.0, 1.57}, sig({7, 8, 9}), kSmallCov,
                     everything, 3.0, Pose2D{0.05, 0.0, 1.57});
  // Brute-force oracle: intersection of {7,8,9} and {1,2,3,4} is empty.
  EXPECT_EQ(signature_overlap(g.nodes[0].signature,
                              g.nodes[static_cast<std::size_t>(*id)].signature),
            0.0);
  EXPECT_FALSE(detect_loop_closure(g, *id, {}, rng).has_value());
}

// Dense Gauss-Newton oracle with numerical Jacobians over the stacked
// weighted residuals; node 0 fixed by exclusion.
std::vector<Pose2D> dense_oracle(const PoseGraph& g, int iters = 100) {
  std::vector<Pose2D> poses;
  for (const auto& n : g.nodes) poses.push_back(n.pose);
  const int nf = static_cast<int>(poses.size()) - 1;
  auto residuals = [&](const std::vector<Pose2D>& p) {
    Eigen::VectorXd r(3 * static_cast<int>(g.edges.size()));
    for (std::size_t k = 0; k < g.edges.size(); ++k) {
      const auto& e = g.edges[k];
      const auto& pi = p[static_cast<std::size_t>(e.from)];
      const auto& pj = p[static_cast<std::size_t>(e.to)];
      const double c = std::cos(pi.theta), s = std::sin(pi.theta);
      const double dx = pj.x - pi.x, dy = pj.y - pi.y;
      Eigen::Vector3d rr(c * dx + s * dy - e.rel.x, -s * dx + c * dy - e.rel.y,
                         wrap_pi(pj.theta - pi.theta - e.rel.theta));
      const Eigen::Matrix3d L = Eigen::LLT<Eigen::Matrix3d>(e.info).matrixL();
      r.segment<3>(3 * static_cast<int>(k)) = L.transpose() * rr;
    }
    return r;
  };
  for (int it = 0; it < iters; ++it) {
    const Eigen::VectorXd r0 = residuals(poses);
    Eigen::MatrixXd J(r0.size(), 3 * nf);
    const double eps = 1e-7;
    for (int v = 0; v < 3 * nf; ++v) {
      std::vector<Pose2D> pp = poses;
      auto& pose = pp[static_cast<std::size_t>(v / 3 + 1)];
      if (v % 3 == 0) pose.x += eps;
      if (v % 3 == 1) pose.y += eps;
      if (v % 3 == 2) pose.theta += eps;
      J.col(v) = (residuals(pp) - r0) / eps;
    }
    const Eigen::VectorXd dx =
        (J.transpose() * J + 1e-12 * Eigen::MatrixXd::Identity(3 * nf, 3 * nf))
            .ldlt()
            .solve(-J.transpose() * r0);
    for (int v = 0; v < nf; ++v) {
      poses[static_cast<std::size_t>(v + 1)].x += dx(3 * v);
      poses[static_cast<std::size_t>(v + 1)].y += dx(3 * v + 1);
      poses[static_cast<std::size_t>(v + 1)].theta =
          wrap_pi(poses[static_cast<std::size_t>(v + 1)].theta + dx(3 * v + 2));
    }
    if (dx.cwiseAbs().maxCoeff() < 1e-12) break;
  }
  return poses;
}

PoseGraph chain3_with_loop() {
  PoseGraph g;
  NodePolicy everything{0.0, 0.0};
  maybe_add_node(g, {0, 0, 0}, {}, 0.01 * Eigen::Matrix3d::Identity(),
                 everything, 0.0, std::nullopt);
  maybe_add_node(g, {1.05, 0.02, 0.01}, {}, 0.01 * Eigen::Matrix3d::Identity(),
                 everything, 1.0, std::nullopt);
  maybe_add_node(g, {1.98, -0.03, -0.02}, {},
                 0.01 * Eigen::Matrix3d::Identity(), everything, 2.0,
                 std::nullopt);
  GraphEdge loop;
  loop.from = 0;
  loop.to = 2;
  loop.rel = {2.0, 0.0, 0.0};
  loop.info = Eigen::Vector3d(1e4, 1e4, 1e4).asDiagonal();
  loop.kind = GraphEdge::Kind::kLoop;
  g.edges.push_back(loop);
  return g;
}

TEST(Optimize, ZeroResidualGraphUnchanged) {
  PoseGraph g;
  NodePolicy everything{0.0, 0.0};
  maybe_add_node(g, {0, 0, 0}, {}, kSmallCov, everything, 0.0, std::nullopt);
  maybe_add_node(g, {1, 0, 0.2}, {}, kSmallCov, everything, 1.0, std::nullopt);
  maybe_add_node(g, {2, 0.5, 0.4}, {}, kSmallCov, everything, 2.0, std::nullopt);
  const auto r = optimize_graph(g);
  EXPECT_NEAR(r.chi2_initial, 0.0, 1e-18);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    EXPECT_EQ(r.poses[i].x, g.nodes[i].pose.x);
    EXPECT_EQ(r.poses[i].y, g.nodes[i].pose.y);
    EXPECT_EQ(r.poses[i].theta, g.nodes[i].pose.theta);
  }
}

TEST(Optimize, ThreeNodeChainMatchesDenseOracle) {
  const PoseGraph g = chain3_with_loop();
  const auto mine = optimize_graph(g);
  const auto oracle = dense_oracle(g);
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    EXPECT_NEAR(mine.poses[i].x, oracle[i].x, 1e-6);
    EXPECT_NEAR(mine.poses[i].y, oracle[i].y, 1e-6);
    EXPECT_NEAR(mine.poses[i].theta, oracle[i].theta, 1e-6);
  }
  EXPECT_LE(mine.chi2_final, mine.chi2_initial);
}

TEST(Optimize, GaugeFixedFirstNodeBitIdentical) {
  const PoseGraph g = chain3_with_loop();
  const auto r = optimize_graph(g);
  EXPECT_EQ(r.poses[0].x, g.nodes[0].pose.x);
  EXPECT_EQ(r.poses[0].y, g.nodes[0].pose.y);
  EXPECT_EQ(r.poses[0].theta, g.nodes[0].pose.theta);
}

TEST(Optimize, DriftedLoopRmseReducedByHalf) {
  // 20 nodes around a 4x4 square; odometry biased so dead reckoning drifts,
  // one exact closure from last to first.
  PoseGraph g;
  NodePolicy everything{0.0, 0.0};
  std::vector<Pose2D> truth;
  Pose2D t{0, 0, 0};
  for (int leg = 0; leg < 4; ++leg) {
    for (int i = 0; i < 5; ++i) {
      truth.push_back(t);
      if (i == 4)
        t.theta = wrap_pi(t.theta + kPi / 2.0);
      else {
        t.x += std::cos(t.theta);
        t.y += std::sin(t.theta);
      }
    }
  }
  ASSERT_EQ(truth.size(), 20u);
  // Dead-reckoned poses from heading-biased odometry: the classic banana.
  const Eigen::Matrix3d odom_cov =
      Eigen::Vector3d(0.01, 0.01, 0.2).asDiagonal();
  Pose2D dr = truth[0];
  std::vector<Pose2D> noisy{dr};
  maybe_add_node(g, dr, {}, odom_cov, everything, 0.0, truth[0]);
  for (std::size_t i = 1; i < truth.size(); ++i) {
    Pose2D rel = se2_between(truth[i - 1], truth[i]);
    rel.theta = wrap_pi(rel.theta + 0.02);  // systematic heading drift
    dr = se2_compose(dr, rel);
    noisy.push_back(dr);
    maybe_add_node(g, dr, {}, odom_cov, everything, static_cast<double>(i),
                   truth[i]);
  }
  GraphEdge loop;
  loop.from = 19;
  loop.to = 0;
  loop.rel = se2_between(truth[19], truth[0]);
  loop.info = Eigen::Vector3d(1e6, 1e6, 1e6).asDiagonal();
  loop.kind = GraphEdge::Kind::kLoop;
  g.edges.push_back(loop);

  auto rmse = [&](const std::vector<Pose2D>& poses) {
    double acc = 0.0;
    for (std::size_t i = 0; i < poses.size(); ++i)
      acc += (poses[i].x - truth[i].x) * (poses[i].x - truth[i].x) +
             (poses[i].y - truth[i].y) * (poses[i].y - truth[i].y);
    return std::sqrt(acc / static_cast<double>(poses.size()));
  };
  const double before = rmse(noisy);
  const auto r = optimize_graph(g);
  const double after = rmse(r.poses);
  EXPECT_LE(after, 0.5 * before);
  EXPECT_LE(r.chi2_final, r.chi2_initial);
}

TEST(Optimize, NoiselessOdometryEqualsDeadReckoning) {
  PoseGraph g;
  NodePolicy everything{0.0, 0.0};
  Pose2D p{0, 0, 0};
  maybe_add_node(g, p, {}, 1e-6 * Eigen::Matrix3d::Identity(), everything, 0.0,
                 std::nullopt);
  std::vector<Pose2D> dead{p};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  for (int i = 1; i < 15; ++i) {
    p = se2_compose(p, {0.4, u(rng), u(rng)});
    dead.push_back(p);
    maybe_add_node(g, p, {}, 1e-6 * Eigen::Matrix3d::Identity(), everything,
                   static_cast<double>(i), std::nullopt);
  }
  const auto r = optimize_graph(g);
  for (std::size_t i = 0; i < dead.size(); ++i) {
    EXPECT_NEAR(r.poses[i].x, dead[i].x, 1e-9);
    EXPECT_NEAR(r.poses[i].y, dead[i].y, 1e-9);
    EXPECT_NEAR(r.poses[i].theta, dead[i].theta, 1e-9);
  }
}

}  // namespace
}  // namespace panslam::graph
