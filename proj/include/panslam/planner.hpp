#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "panslam/estimation.hpp"
#include "panslam/grids.hpp"
#include "panslam/world.hpp"

namespace panslam::plan {

struct FrontierCluster {
  std::vector<std::pair<int, int>> cells;
  double centroid_x = 0.0;
  double centroid_y = 0.0;
};

/// Frontier cells (free, 4-adjacent to unknown) grouped by 8-connectivity.
/// Clusters smaller than min_cluster_cells are discarded.
std::vector<FrontierCluster> detect_frontiers(const ClassGrid& grid,
                                              int min_cluster_cells = 3);

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double psi = 0.0;      // desired camera world heading at the waypoint
  double utility = 0.0;  // expected newly observed unknown cells
};

struct PlannerParams {
  int heading_candidates = 36;
  double utility_ray_step = deg2rad(5.0);
  double inflate_radius = 0.0;  // robot radius + one cell, set by caller
};

struct PlanResult {
  Waypoint waypoint;
  std::vector<std::pair<double, double>> path;  // world points, start->goal
  double path_length = 0.0;
  // Information-gain gaze schedule: desired camera heading per path point,
  // re-aimed at successive anchors toward whatever unknown mass scores best
  // there. Empty means hold the waypoint heading.
  std::vector<double> gaze;
};

/// Pick the (cluster, heading) pair maximizing unknown-cell utility per meter
/// of path, ties broken by the smallest heading change. Returns nullopt when
/// no frontier is reachable (exploration complete).
std::optional<PlanResult> select_waypoint(
    const std::vector<FrontierCluster>& frontiers,
    const est::MergedState& state, const ClassGrid& grid,
    const world::CameraModel& cam, const PlannerParams& params);

/// 8-connected A* over traversable cells; returns cell-center points.
std::optional<std::vector<std::pair<int, int>>> astar_cells(
    const ClassGrid& grid, const std::vector<std::uint8_t>& traversable,
    std::pair<int, int> start, std::pair<int, int> goal);

/// Free cells whose clearance from occupied cells is at least `radius`.
std::vector<std::uint8_t> traversable_mask(const ClassGrid& grid, double radius);

}  // namespace panslam::plan
