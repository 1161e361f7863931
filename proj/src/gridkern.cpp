#include "panslam/gridkern.hpp"

namespace panslam::gridkern {

namespace {

bool g_force_scalar = false;

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

bool use_avx2() { return !g_force_scalar && cpu_has_avx2(); }

}  // namespace

void set_force_scalar(bool on) { g_force_scalar = on; }

bool avx2_available() { return cpu_has_avx2(); }

std::string_view active_backend() { return use_avx2() ? "avx2" : "scalar"; }

ClassCounts classify(const double* log_odds, const std::uint8_t* observed,
                     std::size_t n, double lo_free, double lo_occ,
                     std::uint8_t* out) {
#if defined(__x86_64__) || defined(_M_X64)
  if (use_avx2()) return avx2::classify(log_odds, observed, n, lo_free, lo_occ, out);
#endif
  return scalar::classify(log_odds, observed, n, lo_free, lo_occ, out);
}

ConfusionCounts confusion(const std::uint8_t* truth,
                          const std::uint8_t* estimate, std::size_t n) {
#if defined(__x86_64__) || defined(_M_X64)
  if (use_avx2()) return avx2::confusion(truth, estimate, n);
#endif
  return scalar::confusion(truth, estimate, n);
}

}  // namespace panslam::gridkern
