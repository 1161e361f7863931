#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace panslam::gridkern {

/// Three-way cell label shared by the mapping and metrics layers.
enum class CellClass : std::uint8_t { kUnknown = 0, kFree = 1, kOccupied = 2 };

/// Per-class cell totals in label order {unknown, free, occupied}.
struct ClassCounts {
  std::size_t unknown = 0;
  std::size_t free = 0;
  std::size_t occupied = 0;
};

/// 3x3 confusion totals, row = ground-truth class, col = estimated class,
/// both indexed by CellClass value.
struct ConfusionCounts {
  std::size_t m[3][3] = {};
};

// Classify n cells from log-odds + observed flags. Writes one CellClass byte
// per cell into `out` (may be null when only counts are needed) and returns
// the class totals. A cell is unknown when unobserved or when its log-odds
// lies strictly between the two thresholds.
using ClassifyFn = ClassCounts (*)(const double* log_odds,
                                   const std::uint8_t* observed, std::size_t n,
                                   double lo_free, double lo_occ,
                                   std::uint8_t* out);

// Accumulate the 3x3 confusion matrix between two class-label arrays.
using ConfusionFn = ConfusionCounts (*)(const std::uint8_t* truth,
                                        const std::uint8_t* estimate,
                                        std::size_t n);

namespace scalar {
ClassCounts classify(const double* log_odds, const std::uint8_t* observed,
                     std::size_t n, double lo_free, double lo_occ,
                     std::uint8_t* out);
ConfusionCounts confusion(const std::uint8_t* truth,
                          const std::uint8_t* estimate, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
namespace avx2 {
ClassCounts classify(const double* log_odds, const std::uint8_t* observed,
                     std::size_t n, double lo_free, double lo_occ,
                     std::uint8_t* out);
ConfusionCounts confusion(const std::uint8_t* truth,
                          const std::uint8_t* estimate, std::size_t n);
}  // namespace avx2
#endif

/// Force the scalar backend regardless of CPU support (for tests/debugging).
void set_force_scalar(bool on);
bool avx2_available();
std::string_view active_backend();

/// Dispatched entry points. Backend is resolved once per process (or after
/// set_force_scalar) and is identical for every call, keeping runs
/// deterministic on a given machine.
ClassCounts classify(const double* log_odds, const std::uint8_t* observed,
                     std::size_t n, double lo_free, double lo_occ,
                     std::uint8_t* out);
ConfusionCounts confusion(const std::uint8_t* truth,
                          const std::uint8_t* estimate, std::size_t n);

}  // namespace panslam::gridkern
