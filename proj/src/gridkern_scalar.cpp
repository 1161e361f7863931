#include "panslam/gridkern.hpp"

namespace panslam::gridkern::scalar {

ClassCounts classify(const double* log_odds, const std::uint8_t* observed,
                     std::size_t n, double lo_free, double lo_occ,
                     std::uint8_t* out) {
  ClassCounts c;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint8_t cls = static_cast<std::uint8_t>(CellClass::kUnknown);
    if (observed[i]) {
      if (log_odds[i] >= lo_occ)
        cls = static_cast<std::uint8_t>(CellClass::kOccupied);
      else if (log_odds[i] <= lo_free)
        cls = static_cast<std::uint8_t>(CellClass::kFree);
    }
    if (out) out[i] = cls;
    if (cls == static_cast<std::uint8_t>(CellClass::kOccupied))
      ++c.occupied;
    else if (cls == static_cast<std::uint8_t>(CellClass::kFree))
      ++c.free;
    else
      ++c.unknown;
  }
  return c;
}

ConfusionCounts confusion(const std::uint8_t* truth,
                          const std::uint8_t* estimate, std::size_t n) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < n; ++i) ++c.m[truth[i]][estimate[i]];
  return c;
}

}  // namespace panslam::gridkern::scalar
