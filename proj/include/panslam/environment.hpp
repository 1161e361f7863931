#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "panslam/grids.hpp"

namespace panslam::world {

enum class EnvError {
  kMalformed,        // unreadable / inconsistent file
  kUnbounded,        // boundary not fully occupied
  kNoFreeSpace,      // no free connected region
  kStartInObstacle,  // configured start pose collides
};

class EnvLoadError : public std::runtime_error {
 public:
  EnvLoadError(EnvError code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  EnvError code() const { return code_; }

 private:
  EnvError code_;
};

/// Ground-truth bounded 2-D world: boolean occupancy over a cell grid.
struct Environment {
  GridSpec spec;
  std::vector<std::uint8_t> occ;  // 1 = occupied

  bool occupied_cell(int ix, int iy) const {
    if (!spec.contains(ix, iy)) return true;  // outside counts as solid
    return occ[spec.index(ix, iy)] != 0;
  }
  bool occupied_at(double x, double y) const {
    return occupied_cell(spec.cell_x(x), spec.cell_y(y));
  }
  std::size_t occupied_count() const;
  std::size_t free_count() const;
};

/// Load an environment from an ASCII grid ('#' occupied, '.' free) or a
/// binary PGM (P5; <=127 occupied, else free). Format picked by content.
/// Validates boundedness and the existence of a free connected region.
Environment load_environment(const std::string& path, double resolution,
                             double origin_x = 0.0, double origin_y = 0.0);

/// Disc of radius r centered at (x, y) intersects an occupied cell.
bool disc_collides(const Environment& env, double x, double y, double r);

/// Throws EnvLoadError(kStartInObstacle) if the robot disc does not fit at
/// the start pose.
void validate_start(const Environment& env, double x, double y, double radius);

/// Ground-truth class grid at map resolution over the environment box:
/// free = free cells ray-reachable from the start's free component,
/// occupied = occupied cells bordering that region, unknown = the rest
/// (wall interiors, enclosed hollows). This is what an exhaustive sensor
/// sweep from every reachable pose could label.
ClassGrid ground_truth_classes(const Environment& env, double map_resolution,
                               double start_x, double start_y,
                               double robot_radius);

}  // namespace panslam::world
