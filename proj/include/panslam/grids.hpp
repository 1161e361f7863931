#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "panslam/gridkern.hpp"

namespace panslam {

/// Geometry of a bounded axis-aligned cell grid. Cell (ix, iy) spans
/// [origin + i*res, origin + (i+1)*res) on each axis; iy grows with world y.
struct GridSpec {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double resolution = 0.05;
  int width = 0;
  int height = 0;

  int cell_x(double x) const {
    return static_cast<int>(std::floor((x - origin_x) / resolution));
  }
  int cell_y(double y) const {
    return static_cast<int>(std::floor((y - origin_y) / resolution));
  }
  bool contains(int ix, int iy) const {
    return ix >= 0 && iy >= 0 && ix < width && iy < height;
  }
  double center_x(int ix) const { return origin_x + (ix + 0.5) * resolution; }
  double center_y(int iy) const { return origin_y + (iy + 0.5) * resolution; }
  std::size_t index(int ix, int iy) const {
    return static_cast<std::size_t>(iy) * width + ix;
  }
  std::size_t size() const {
    return static_cast<std::size_t>(width) * height;
  }
  bool same_layout(const GridSpec& o) const {
    return width == o.width && height == o.height &&
           resolution == o.resolution && origin_x == o.origin_x &&
           origin_y == o.origin_y;
  }
};

/// A grid of three-way cell labels (free / occupied / unknown).
struct ClassGrid {
  GridSpec spec;
  std::vector<std::uint8_t> cls;

  gridkern::CellClass at(int ix, int iy) const {
    return static_cast<gridkern::CellClass>(cls[spec.index(ix, iy)]);
  }
};

}  // namespace panslam
