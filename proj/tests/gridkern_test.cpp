#include "panslam/gridkern.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

namespace panslam::gridkern {
namespace {

struct RandomGrid {
  std::vector<double> lo;
  std::vector<std::uint8_t> obs;
  std::vector<std::uint8_t> cls;
};

RandomGrid make_grid(std::size_t n, std::uint64_t seed) {
  RandomGrid g;
  g.lo.resize(n);
  g.obs.resize(n);
  g.cls.resize(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-4.0, 4.0);
  std::bernoulli_distribution b(0.7);
  for (std::size_t i = 0; i < n; ++i) {
    g.lo[i] = u(rng);
    g.obs[i] = b(rng) ? 1 : 0;
  }
  return g;
}

constexpr double kLoFree = -0.6190392084062235;  // logit(0.35)
constexpr double kLoOcc = 0.6190392084062235;    // logit(0.65)

TEST(GridKernels, ScalarClassifyBasics) {
  const double lo[5] = {0.0, 1.0, -1.0, kLoOcc, kLoFree};
  const std::uint8_t obs[5] = {1, 1, 1, 1, 0};
  std::uint8_t cls[5];
  const auto c = scalar::classify(lo, obs, 5, kLoFree, kLoOcc, cls);
  EXPECT_EQ(cls[0], static_cast<std::uint8_t>(CellClass::kUnknown));  // midband
  EXPECT_EQ(cls[1], static_cast<std::uint8_t>(CellClass::kOccupied));
  EXPECT_EQ(cls[2], static_cast<std::uint8_t>(CellClass::kFree));
  EXPECT_EQ(cls[3], static_cast<std::uint8_t>(CellClass::kOccupied));  // boundary inclusive
  EXPECT_EQ(cls[4], static_cast<std::uint8_t>(CellClass::kUnknown));  // unobserved
  EXPECT_EQ(c.occupied, 2u);
  EXPECT_EQ(c.free, 1u);
  EXPECT_EQ(c.unknown, 2u);
}

TEST(GridKernels, CountsPartitionTheGrid) {
  for (std::size_t n : {0u, 1u, 7u, 64u, 1000u, 16384u}) {
    const auto g = make_grid(n, 99 + n);
    const auto c = scalar::classify(g.lo.data(), g.obs.data(), n, kLoFree,
                                    kLoOcc, nullptr);
    EXPECT_EQ(c.unknown + c.free + c.occupied, n);
  }
}

TEST(GridKernels, Avx2ClassifyMatchesScalarExactly) {
  if (!avx2_available()) GTEST_SKIP() << "no AVX2 on this host";
  for (std::size_t n : {1u, 3u, 4u, 5u, 31u, 32u, 33u, 1000u, 160000u}) {
    auto g = make_grid(n, 1234 + n);
    std::vector<std::uint8_t> cls_scalar(n), cls_avx(n);
    const auto cs = scalar::classify(g.lo.data(), g.obs.data(), n, kLoFree,
                                     kLoOcc, cls_scalar.data());
    const auto ca = avx2::classify(g.lo.data(), g.obs.data(), n, kLoFree,
                                   kLoOcc, cls_avx.data());
    EXPECT_EQ(cs.unknown, ca.unknown);
    EXPECT_EQ(cs.free, ca.free);
    EXPECT_EQ(cs.occupied, ca.occupied);
    EXPECT_EQ(cls_scalar, cls_avx);
  }
}

TEST(GridKernels, Avx2ConfusionMatchesScalarExactly) {
  if (!avx2_available()) GTEST_SKIP() << "no AVX2 on this host";
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(0, 2);
  for (std::size_t n : {1u, 31u, 32u, 33u, 97u, 4096u, 160001u}) {
    std::vector<std::uint8_t> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = static_cast<std::uint8_t>(d(rng));
      b[i] = static_cast<std::uint8_t>(d(rng));
    }
    const auto cs = scalar::confusion(a.data(), b.data(), n);
    const auto ca = avx2::confusion(a.data(), b.data(), n);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_EQ(cs.m[i][j], ca.m[i][j]);
  }
}

TEST(GridKernels, ConfusionTotalsPreserved) {
  const std::size_t n = 999;
  std::mt19937_64 rng(6);
  std::uniform_int_distribution<int> d(0, 2);
  std::vector<std::uint8_t> a(n), b(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = static_cast<std::uint8_t>(d(rng));
    b[i] = static_cast<std::uint8_t>(d(rng));
  }
  const auto c = confusion(a.data(), b.data(), n);
  std::size_t total = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) total += c.m[i][j];
  EXPECT_EQ(total, n);
}

TEST(GridKernels, DispatchHonorsForceScalar) {
  set_force_scalar(true);
  EXPECT_EQ(active_backend(), "scalar");
  set_force_scalar(false);
  if (avx2_available()) EXPECT_EQ(active_backend(), "avx2");
}

}  // namespace
}  // namespace panslam::gridkern
