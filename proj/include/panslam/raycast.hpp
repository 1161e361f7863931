#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "panslam/grids.hpp"

namespace panslam {

/// Outcome of a grid ray cast. `distance` is the exact parameter at which the
/// ray enters the blocking cell, or the clamp distance when nothing blocked.
struct RayHit {
  bool hit = false;
  double distance = 0.0;
  int ix = -1;
  int iy = -1;
};

enum class RayStep { kContinue, kStop };

/// Walk the cells pierced by a ray through `g`, visiting each cell with the
/// parameter at which the ray enters it (0 for the start cell). Boundary
/// parameters are computed directly from cell indices, never incrementally,
/// so equal rays reproduce bit-identical distances. On an exact corner
/// crossing the walk steps diagonally.
///
/// visit(ix, iy, t_entry) returns kStop to end the walk (a hit). Leaving the
/// grid or exceeding max_dist ends it without a hit.
template <typename Visit>
RayHit walk_ray(const GridSpec& g, double ox, double oy, double dir_x,
                double dir_y, double max_dist, Visit&& visit) {
  int ix = g.cell_x(ox);
  int iy = g.cell_y(oy);
  double t = 0.0;

  const int step_x = dir_x > 0.0 ? 1 : (dir_x < 0.0 ? -1 : 0);
  const int step_y = dir_y > 0.0 ? 1 : (dir_y < 0.0 ? -1 : 0);

  auto boundary_t_x = [&](int cell) {
    const double bx = g.origin_x + (cell + (step_x > 0 ? 1 : 0)) * g.resolution;
    return (bx - ox) / dir_x;
  };
  auto boundary_t_y = [&](int cell) {
    const double by = g.origin_y + (cell + (step_y > 0 ? 1 : 0)) * g.resolution;
    return (by - oy) / dir_y;
  };

  while (true) {
    if (!g.contains(ix, iy)) return {false, std::min(t, max_dist), ix, iy};
    if (t > max_dist) return {false, max_dist, ix, iy};
    if (visit(ix, iy, t) == RayStep::kStop) return {true, t, ix, iy};

    const double tx = step_x ? boundary_t_x(ix) : std::numeric_limits<double>::infinity();
    const double ty = step_y ? boundary_t_y(iy) : std::numeric_limits<double>::infinity();
    if (!std::isfinite(tx) && !std::isfinite(ty))
      return {false, max_dist, ix, iy};  // degenerate zero direction

    if (tx < ty) {
      ix += step_x;
      t = tx;
    } else if (ty < tx) {
      iy += step_y;
      t = ty;
    } else {
      ix += step_x;
      iy += step_y;
      t = tx;
    }
  }
}

/// First cell along the ray for which `occupied(ix, iy)` holds, out to
/// max_dist. Cells outside the grid end the cast without a hit.
template <typename Occ>
RayHit cast_ray(const GridSpec& g, double ox, double oy, double angle,
                double max_dist, Occ&& occupied) {
  const double dx = std::cos(angle), dy = std::sin(angle);
  return walk_ray(g, ox, oy, dx, dy, max_dist, [&](int ix, int iy, double) {
    return occupied(ix, iy) ? RayStep::kStop : RayStep::kContinue;
  });
}

}  // namespace panslam
