#pragma once

#include <vector>

#include "panslam/grids.hpp"
#include "panslam/world.hpp"

namespace panslam::map {

struct OccupancyParams {
  double l_occ = 0.85;
  double l_free = -0.4;
  double l_max = 4.0;
  double p_occupied = 0.65;  // classification thresholds on p
  double p_free = 0.35;
};

/// Log-odds occupancy map at fixed resolution. Unobserved cells report
/// p = 0.5 and classify as unknown.
class OccupancyGrid {
 public:
  OccupancyGrid(const GridSpec& spec, const OccupancyParams& params);

  /// Apply one camera frame. Cells are deduplicated within the frame; a cell
  /// hit as occupied by any ray takes the occupied update, otherwise one free
  /// update. Log-odds clamp to +/- l_max.
  void update(const std::vector<world::CameraHit>& hits);

  double log_odds(int ix, int iy) const { return log_odds_[spec_.index(ix, iy)]; }
  bool observed(int ix, int iy) const { return observed_[spec_.index(ix, iy)] != 0; }
  double probability(int ix, int iy) const;

  /// Test/tooling access: set a cell directly.
  void set_cell(int ix, int iy, double log_odds, bool observed);

  /// Class labels for every cell (optionally written to `out_classes`, a
  /// buffer of size() bytes) plus the class totals.
  gridkern::ClassCounts classify(std::uint8_t* out_classes = nullptr) const;
  ClassGrid class_grid() const;

  /// Total map entropy in bits over observed cells, and the per-observed-cell
  /// normalized entropy (0 when nothing is observed).
  struct Entropy {
    double bits = 0.0;
    double normalized = 0.0;
    std::size_t observed_cells = 0;
  };
  Entropy entropy() const;

  const GridSpec& spec() const { return spec_; }
  const OccupancyParams& params() const { return params_; }
  std::size_t observed_count() const;

 private:
  GridSpec spec_;
  OccupancyParams params_;
  double lo_free_thresh_;  // log-odds image of p_free
  double lo_occ_thresh_;
  std::vector<double> log_odds_;
  std::vector<std::uint8_t> observed_;
  // frame-local dedup stamps
  mutable std::vector<std::uint32_t> stamp_;
  std::uint32_t epoch_ = 0;
};

/// Replay camera rays from an estimated pose onto the map grid: traversed
/// cells out to each ray's measured range become free hits, the cell entered
/// at the range becomes the occupied hit. This is where estimation error
/// enters the map.
std::vector<world::CameraHit> project_camera_rays(
    const GridSpec& map_spec, double x, double y, double psi,
    const std::vector<world::CamRay>& rays, double max_depth);

}  // namespace panslam::map
