#include "panslam/planner.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

#include "panslam/raycast.hpp"

namespace panslam::plan {

namespace {

using gridkern::CellClass;

bool is_class(const ClassGrid& g, int ix, int iy, CellClass c) {
  return g.spec.contains(ix, iy) && g.at(ix, iy) == c;
}

}  // namespace

std::vector<FrontierCluster> detect_frontiers(const ClassGrid& grid,
                                              int min_cluster_cells) {
  const auto& s = grid.spec;
  std::vector<std::uint8_t> frontier(s.size(), 0);
  for (int iy = 0; iy < s.height; ++iy) {
    for (int ix = 0; ix < s.width; ++ix) {
      if (grid.at(ix, iy) != CellClass::kFree) continue;
      const bool adj_unknown = is_class(grid, ix + 1, iy, CellClass::kUnknown) ||
                               is_class(grid, ix - 1, iy, CellClass::kUnknown) ||
                               is_class(grid, ix, iy + 1, CellClass::kUnknown) ||
                               is_class(grid, ix, iy - 1, CellClass::kUnknown);
      if (adj_unknown) frontier[s.index(ix, iy)] = 1;
    }
  }

  std::vector<FrontierCluster> clusters;
  std::vector<std::uint8_t> seen(s.size(), 0);
  for (int iy = 0; iy < s.height; ++iy) {
    for (int ix = 0; ix < s.width; ++ix) {
      const std::size_t i0 = s.index(ix, iy);
      if (!frontier[i0] || seen[i0]) continue;
      FrontierCluster c;
      std::deque<std::pair<int, int>> q{{ix, iy}};
      seen[i0] = 1;
      while (!q.empty()) {
        auto [cx, cy] = q.front();
        q.pop_front();
        c.cells.emplace_back(cx, cy);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            if (dx == 0 && dy == 0) continue;
            const int nx = cx + dx, ny = cy + dy;
            if (!s.contains(nx, ny)) continue;
            const std::size_t ni = s.index(nx, ny);
            if (!frontier[ni] || seen[ni]) continue;
            seen[ni] = 1;
            q.emplace_back(nx, ny);
          }
        }
      }
      if (static_cast<int>(c.cells.size()) < min_cluster_cells) continue;
      for (auto [cx, cy] : c.cells) {
        c.centroid_x += s.center_x(cx);
        c.centroid_y += s.center_y(cy);
      }
      c.centroid_x /= static_cast<double>(c.cells.size());
      c.centroid_y /= static_cast<double>(c.cells.size());
      clusters.push_back(std::move(c));
    }
  }
  return clusters;
}

std::vector<std::uint8_t> traversable_mask(const ClassGrid& grid, double radius) {
  const auto& s = grid.spec;
  std::vector<std::uint8_t> mask(s.size(), 0);
  const int r_cells = static_cast<int>(std::ceil(radius / s.resolution));
  const double r2 = radius * radius;
  for (int iy = 0; iy < s.height; ++iy) {
    for (int ix = 0; ix < s.width; ++ix) {
      if (grid.at(ix, iy) != CellClass::kFree) continue;
      bool clear = true;
      for (int dy = -r_cells; dy <= r_cells && clear; ++dy) {
        for (int dx = -r_cells; dx <= r_cells && clear; ++dx) {
          const int nx = ix + dx, ny = iy + dy;
          const double d2 = (dx * dx + dy * dy) *
                            s.resolution * s.resolution;
          if (d2 > r2) continue;
          // Outside the grid counts as blocked; unknown does not block
          // driving through mapped free corridors but occupied does.
          if (!s.contains(nx, ny) ||
              grid.at(nx, ny) == CellClass::kOccupied)
            clear = false;
        }
      }
      mask[s.index(ix, iy)] = clear ? 1 : 0;
    }
  }
  return mask;
}

std::optional<std::vector<std::pair<int, int>>> astar_cells(
    const ClassGrid& grid, const std::vector<std::uint8_t>& traversable,
    std::pair<int, int> start, std::pair<int, int> goal) {
  const auto& s = grid.spec;
  if (!s.contains(start.first, start.second) ||
      !s.contains(goal.first, goal.second))
    return std::nullopt;
  if (!traversable[s.index(start.first, start.second)] ||
      !traversable[s.index(goal.first, goal.second)])
    return std::nullopt;

  constexpr double kSqrt2 = 1.4142135623730951;
  auto heuristic = [&](int ix, int iy) {
    const double dx = std::abs(ix - goal.first);
    const double dy = std::abs(iy - goal.second);
    return (dx + dy) + (kSqrt2 - 2.0) * std::min(dx, dy);
  };

  struct QItem {
    double f;
    double g;
    int ix, iy;
    bool operator>(const QItem& o) const { return f > o.f; }
  };
  std::priority_queue<QItem, std::vector<QItem>, std::greater<>> open;
  std::vector<double> gscore(s.size(), std::numeric_limits<double>::infinity());
  std::vector<int> parent(s.size(), -1);

  const std::size_t si = s.index(start.first, start.second);
  gscore[si] = 0.0;
  open.push({heuristic(start.first, start.second), 0.0, start.first, start.second});

  const int dxs[8] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dys[8] = {0, 0, 1, -1, 1, -1, 1, -1};

  while (!open.empty()) {
    const QItem cur = open.top();
    open.pop();
    const std::size_t ci = s.index(cur.ix, cur.iy);
    if (cur.g > gscore[ci] + 1e-12) continue;
    if (cur.ix == goal.first && cur.iy == goal.second) {
      std::vector<std::pair<int, int>> path;
      int ix = cur.ix, iy = cur.iy;
      while (true) {
        path.emplace_back(ix, iy);
        const int p = parent[s.index(ix, iy)];
        if (p < 0) break;
        ix = p % s.width;
        iy = p / s.width;
      }
      std::reverse(path.begin(), path.end());
      return path;
    }
    for (int d = 0; d < 8; ++d) {
      const int nx = cur.ix + dxs[d], ny = cur.iy + dys[d];
      if (!s.contains(nx, ny)) continue;
      const std::size_t ni = s.index(nx, ny);
      if (!traversable[ni]) continue;
      // no cutting corners diagonally between blocked cells
      if (d >= 4 && (!traversable[s.index(cur.ix + dxs[d], cur.iy)] ||
                     !traversable[s.index(cur.ix, cur.iy + dys[d])]))
        continue;
      const double step = d < 4 ? 1.0 : kSqrt2;
      const double ng = cur.g + step;
      if (ng < gscore[ni] - 1e-12) {
        gscore[ni] = ng;
        parent[ni] = static_cast<int>(ci);
        open.push({ng + heuristic(nx, ny), ng, nx, ny});
      }
    }
  }
  return std::nullopt;
}

namespace {

// Nearest traversable cell to a world point, by ring growth. Used for the
// robot's own cell, which sits in (or next to) traversable space.
std::optional<std::pair<int, int>> nearest_traversable(
    const GridSpec& s, const std::vector<std::uint8_t>& traversable, double x,
    double y, int max_ring = 8) {
  const int cx = s.cell_x(x), cy = s.cell_y(y);
  for (int ring = 0; ring <= max_ring; ++ring) {
    std::optional<std::pair<int, int>> best;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int dy = -ring; dy <= ring; ++dy) {
      for (int dx = -ring; dx <= ring; ++dx) {
        if (std::max(std::abs(dx), std::abs(dy)) != ring) continue;
        const int nx = cx + dx, ny = cy + dy;
        if (!s.contains(nx, ny) || !traversable[s.index(nx, ny)]) continue;
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
          best_d2 = d2;
          best = {nx, ny};
        }
      }
    }
    if (best) return best;
  }
  return std::nullopt;
}

// Project a frontier centroid to a traversable cell by BFS over free cells
// only, so the goal can never jump across a wall into another room.
std::optional<std::pair<int, int>> project_goal(
    const ClassGrid& grid, const std::vector<std::uint8_t>& traversable,
    double x, double y, std::size_t max_cells = 4000) {
  const auto& s = grid.spec;
  int cx = s.cell_x(x), cy = s.cell_y(y);
  if (!s.contains(cx, cy)) return std::nullopt;
  // Centroids of concave clusters can land off the free space; snap first.
  if (grid.at(cx, cy) != CellClass::kFree) {
    bool found = false;
    for (int ring = 1; ring <= 3 && !found; ++ring) {
      for (int dy = -ring; dy <= ring && !found; ++dy) {
        for (int dx = -ring; dx <= ring && !found; ++dx) {
          const int nx = cx + dx, ny = cy + dy;
          if (s.contains(nx, ny) && grid.at(nx, ny) == CellClass::kFree) {
            cx = nx;
            cy = ny;
            found = true;
          }
        }
      }
    }
    if (!found) return std::nullopt;
  }
  std::deque<std::pair<int, int>> q{{cx, cy}};
  std::vector<std::uint8_t> seen(s.size(), 0);
  seen[s.index(cx, cy)] = 1;
  std::size_t visited = 0;
  while (!q.empty() && visited < max_cells) {
    auto [ix, iy] = q.front();
    q.pop_front();
    ++visited;
    if (traversable[s.index(ix, iy)]) return {{ix, iy}};
    for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const int nx = ix + dx, ny = iy + dy;
      if (!s.contains(nx, ny)) continue;
      const std::size_t ni = s.index(nx, ny);
      if (seen[ni] || grid.at(nx, ny) != CellClass::kFree) continue;
      seen[ni] = 1;
      q.emplace_back(nx, ny);
    }
  }
  return std::nullopt;
}

// Per-ray unknown-cell counts around a candidate position: rays stop at
// occupied cells, unknown cells are counted and do not occlude.
std::vector<double> ray_unknown_counts(const ClassGrid& grid, double x,
                                       double y, int n_rays, double max_depth) {
  std::vector<double> counts(static_cast<std::size_t>(n_rays), 0.0);
  for (int k = 0; k < n_rays; ++k) {
    const double a = kTwoPi * k / n_rays;
    const double dx = std::cos(a), dy = std::sin(a);
    double acc = 0.0;
    walk_ray(grid.spec, x, y, dx, dy, max_depth, [&](int ix, int iy, double) {
      const CellClass c = grid.at(ix, iy);
      if (c == CellClass::kOccupied) return RayStep::kStop;
      if (c == CellClass::kUnknown) acc += 1.0;
      return RayStep::kContinue;
    });
    counts[static_cast<std::size_t>(k)] = acc;
  }
  return counts;
}

// Utility-optimal camera heading at a point; fallback when nothing unknown
// is in range.
double best_sector_heading(const ClassGrid& grid, double x, double y,
                           const world::CameraModel& cam,
                           const PlannerParams& params, double fallback) {
  const int n_rays =
      std::max(8, static_cast<int>(std::round(kTwoPi / params.utility_ray_step)));
  const int rays_in_fov =
      std::max(1, static_cast<int>(std::round(cam.fov / (kTwoPi / n_rays))));
  const auto counts = ray_unknown_counts(grid, x, y, n_rays, cam.max_depth);
  double best_util = 0.0, best_heading = fallback;
  for (int h = 0; h < params.heading_candidates; ++h) {
    const double heading = -kPi + kTwoPi * h / params.heading_candidates;
    const int first_ray = static_cast<int>(
        std::floor((heading - cam.fov / 2.0) / (kTwoPi / n_rays)));
    double util = 0.0;
    for (int k = 0; k < rays_in_fov; ++k) {
      int r = (first_ray + k) % n_rays;
      if (r < 0) r += n_rays;
      util += counts[static_cast<std::size_t>(r)];
    }
    if (util > best_util + 1e-12) {
      best_util = util;
      best_heading = heading;
    }
  }
  return best_heading;
}

}  // namespace

std::optional<PlanResult> select_waypoint(
    const std::vector<FrontierCluster>& frontiers,
    const est::MergedState& state, const ClassGrid& grid,
    const world::CameraModel& cam, const PlannerParams& params) {
  if (frontiers.empty()) return std::nullopt;
  const auto& s = grid.spec;
  // Evaluating every cluster costs one A* each; keep the largest ones.
  std::vector<const FrontierCluster*> picked;
  picked.reserve(frontiers.size());
  for (const auto& c : frontiers) picked.push_back(&c);
  if (picked.size() > 16) {
    std::partial_sort(picked.begin(), picked.begin() + 16, picked.end(),
                      [](const FrontierCluster* a, const FrontierCluster* b) {
                        return a->cells.size() > b->cells.size();
                      });
    picked.resize(16);
  }
  const auto traversable = traversable_mask(grid, params.inflate_radius);

  const auto start_cell =
      nearest_traversable(s, traversable, state.x, state.y, 8);
  if (!start_cell) return std::nullopt;

  const int n_rays =
      std::max(8, static_cast<int>(std::round(kTwoPi / params.utility_ray_step)));
  const int rays_in_fov =
      std::max(1, static_cast<int>(std::round(cam.fov / (kTwoPi / n_rays))));

  std::optional<PlanResult> best;
  double best_score = -1.0;
  double best_dpsi = std::numeric_limits<double>::infinity();

  for (const auto* cluster_ptr : picked) {
    const auto& cluster = *cluster_ptr;
    const auto goal =
        project_goal(grid, traversable, cluster.centroid_x, cluster.centroid_y);
    if (!goal) continue;
    const auto cells = astar_cells(grid, traversable, *start_cell, *goal);
    if (!cells) continue;

    PlanResult cand;
    cand.path.reserve(cells->size());
    double len = 0.0;
    for (std::size_t i = 0; i < cells->size(); ++i) {
      const auto [ix, iy] = (*cells)[i];
      cand.path.emplace_back(s.center_x(ix), s.center_y(iy));
      if (i > 0)
        len += hypot2(cand.path[i].first - cand.path[i - 1].first,
                      cand.path[i].second - cand.path[i - 1].second);
    }
    cand.path_length = len;
    cand.waypoint.x = s.center_x(goal->first);
    cand.waypoint.y = s.center_y(goal->second);

    const auto counts = ray_unknown_counts(grid, cand.waypoint.x,
                                           cand.waypoint.y, n_rays,
                                           cam.max_depth);
    // Sliding sector sum over the candidate headings.
    for (int h = 0; h < params.heading_candidates; ++h) {
      const double heading = -kPi + kTwoPi * h / params.heading_candidates;
      const int first_ray = static_cast<int>(std::floor(
          (heading - cam.fov / 2.0) / (kTwoPi / n_rays)));
      double util = 0.0;
      for (int k = 0; k < rays_in_fov; ++k) {
        int r = (first_ray + k) % n_rays;
        if (r < 0) r += n_rays;
        util += counts[static_cast<std::size_t>(r)];
      }
      const double score = util / (len + s.resolution);
      const double dpsi = std::abs(wrap_pi(heading - state.psi));
      const bool better =
          score > best_score + 1e-12 ||
          (score > best_score - 1e-12 && dpsi < best_dpsi - 1e-12);
      if (better) {
        cand.waypoint.psi = heading;
        cand.waypoint.utility = util;
        best = cand;
        best_score = score;
        best_dpsi = dpsi;
      }
    }
  }
  if (best && best->path.size() >= 2) {
    // Re-aim the camera at path anchors so the gaze keeps chasing whatever
    // is unmapped near the route, not just the terminal view.
    auto& p = *best;
    std::vector<double> arc(p.path.size(), 0.0);
    for (std::size_t i = 1; i < p.path.size(); ++i)
      arc[i] = arc[i - 1] + hypot2(p.path[i].first - p.path[i - 1].first,
                                   p.path[i].second - p.path[i - 1].second);
    const double L = arc.back();
    const double fractions[3] = {0.15, 0.5, 0.8};
    double anchor_heading[3];
    for (int a = 0; a < 3; ++a) {
      std::size_t idx = 0;
      while (idx + 1 < p.path.size() && arc[idx] < fractions[a] * L) ++idx;
      anchor_heading[a] =
          best_sector_heading(grid, p.path[idx].first, p.path[idx].second, cam,
                              params, p.waypoint.psi);
    }
    p.gaze.resize(p.path.size());
    for (std::size_t i = 0; i < p.path.size(); ++i) {
      const double f = L > 1e-9 ? arc[i] / L : 1.0;
      p.gaze[i] = f < 0.35 ? anchor_heading[0]
                  : f < 0.65 ? anchor_heading[1]
                  : f < 0.9 ? anchor_heading[2]
                             : p.waypoint.psi;
    }
  }
  return best;
}

}  // namespace panslam::plan
