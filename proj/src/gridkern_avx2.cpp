// AVX2 variants of the grid kernels. Compiled with -mavx2 in its own TU;
// callers must gate on gridkern::avx2_available(). Results are bit-identical
// to the scalar reference: all lanes do compares, masking and popcounts only.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include "panslam/gridkern.hpp"

namespace panslam::gridkern::avx2 {

namespace {

inline int popcount16(int mask) { return __builtin_popcount(mask & 0xffff); }

}  // namespace

ClassCounts classify(const double* log_odds, const std::uint8_t* observed,
                     std::size_t n, double lo_free, double lo_occ,
                     std::uint8_t* out) {
  ClassCounts c;
  const __m256d vfree = _mm256_set1_pd(lo_free);
  const __m256d vocc = _mm256_set1_pd(lo_occ);

  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d lo = _mm256_loadu_pd(log_odds + i);
    // 4-bit lane masks for the two threshold tests.
    const int mocc = _mm256_movemask_pd(_mm256_cmp_pd(lo, vocc, _CMP_GE_OQ));
    const int mfree = _mm256_movemask_pd(_mm256_cmp_pd(lo, vfree, _CMP_LE_OQ));
    int mobs = 0;
    for (int j = 0; j < 4; ++j) mobs |= (observed[i + j] ? 1 : 0) << j;

    const int occ = mocc & mobs;
    const int fre = mfree & mobs & ~mocc;
    c.occupied += static_cast<std::size_t>(popcount16(occ));
    c.free += static_cast<std::size_t>(popcount16(fre));
    c.unknown += static_cast<std::size_t>(4 - popcount16(occ) - popcount16(fre));
    if (out) {
      for (int j = 0; j < 4; ++j) {
        out[i + j] = (occ >> j & 1)
                         ? static_cast<std::uint8_t>(CellClass::kOccupied)
                         : (fre >> j & 1)
                               ? static_cast<std::uint8_t>(CellClass::kFree)
                               : static_cast<std::uint8_t>(CellClass::kUnknown);
      }
    }
  }
  if (i < n) {
    ClassCounts tail = scalar::classify(log_odds + i, observed + i, n - i,
                                        lo_free, lo_occ, out ? out + i : nullptr);
    c.unknown += tail.unknown;
    c.free += tail.free;
    c.occupied += tail.occupied;
  }
  return c;
}

ConfusionCounts confusion(const std::uint8_t* truth,
                          const std::uint8_t* estimate, std::size_t n) {
  ConfusionCounts c;
  std::size_t i = 0;
  // Count each (truth, estimate) pair by equality masks over 32-byte blocks.
  for (; i + 32 <= n; i += 32) {
    const __m256i t = _mm256_loadu_si256(
        reinterpret_cast<const __m256i*>(truth + i));
    const __m256i e = _mm256_loadu_si256(
        reinterpret_cast<const __m256i*>(estimate + i));
    for (int a = 0; a < 3; ++a) {
      const __m256i va = _mm256_set1_epi8(static_cast<char>(a));
      const int ma = _mm256_movemask_epi8(_mm256_cmpeq_epi8(t, va));
      if (!ma) continue;
      for (int b = 0; b < 3; ++b) {
        const __m256i vb = _mm256_set1_epi8(static_cast<char>(b));
        const int mb = _mm256_movemask_epi8(_mm256_cmpeq_epi8(e, vb));
        c.m[a][b] += static_cast<std::size_t>(
            __builtin_popcount(static_cast<unsigned>(ma & mb)));
      }
    }
  }
  for (; i < n; ++i) ++c.m[truth[i]][estimate[i]];
  return c;
}

}  // namespace panslam::gridkern::avx2

#endif  // x86_64
