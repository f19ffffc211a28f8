#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstring>
#include <vector>

#include "doctest.h"
#include "simfuse/rng.hpp"
#include "simfuse/simd/kernels.hpp"

using namespace simfuse;
using namespace simfuse::simd;

namespace {

std::vector<double> random_series(Rng& rng, std::size_t len) {
  std::vector<double> v(len);
  for (auto& x : v) x = rng.normal(0.0, 3.0);
  return v;
}

bool bit_equal(double a, double b) {
  return std::memcmp(&a, &b, sizeof a) == 0;
}

}  // namespace

TEST_CASE("scalar dtw cost matches hand-run tables") {
  const double t1[] = {0.0, 1.0};
  const double s1[] = {1.0};
  CHECK(dtw_cost_scalar(t1, 2, s1, 1) == doctest::Approx(1.0).epsilon(1e-12));

  const double t2[] = {1.0, 2.0, 3.0};
  const double s2[] = {2.0, 2.0, 2.0};
  CHECK(dtw_cost_scalar(t2, 3, s2, 3) == doctest::Approx(2.0).epsilon(1e-12));

  const double x[] = {5.0};
  CHECK(dtw_cost_scalar(x, 1, x, 1) == 0.0);
}

TEST_CASE("scalar dtw cost is symmetric") {
  Rng rng(7);
  for (int it = 0; it < 50; ++it) {
    const auto a = random_series(rng, 1 + rng.uniform_index(40));
    const auto b = random_series(rng, 1 + rng.uniform_index(40));
    const double ab = dtw_cost_scalar(a.data(), a.size(), b.data(), b.size());
    const double ba = dtw_cost_scalar(b.data(), b.size(), a.data(), a.size());
    CHECK(bit_equal(ab, ba));
  }
}

TEST_CASE("banded scalar dtw equals unbanded when the band covers the table") {
  Rng rng(11);
  for (int it = 0; it < 50; ++it) {
    const auto a = random_series(rng, 1 + rng.uniform_index(30));
    const auto b = random_series(rng, 1 + rng.uniform_index(30));
    const std::size_t full = std::max(a.size(), b.size());
    const double unb = dtw_cost_scalar(a.data(), a.size(), b.data(), b.size());
    const double band =
        dtw_cost_banded_scalar(a.data(), a.size(), b.data(), b.size(), full);
    CHECK(bit_equal(unb, band));
  }
}

TEST_CASE("banded scalar dtw prunes cells: band 0 on equal lengths walks the diagonal") {
  const double a[] = {0.0, 1.0, 2.0, 3.0};
  const double b[] = {1.0, 1.0, 2.0, 5.0};
  double diag = 0.0;
  for (int i = 0; i < 4; ++i) diag += (a[i] - b[i]) * (a[i] - b[i]);
  CHECK(dtw_cost_banded_scalar(a, 4, b, 4, 0) ==
        doctest::Approx(diag).epsilon(1e-12));
}

TEST_CASE("dispatched dtw cost is bit-identical to the scalar reference") {
  INFO("active level: ", level_name(active_level()));
  Rng rng(13);
  for (int it = 0; it < 300; ++it) {
    const auto a = random_series(rng, 1 + rng.uniform_index(64));
    const auto b = random_series(rng, 1 + rng.uniform_index(64));
    const double ref = dtw_cost_scalar(a.data(), a.size(), b.data(), b.size());
    const double got = dtw_cost(a.data(), a.size(), b.data(), b.size());
    CHECK(bit_equal(ref, got));
  }
}

#if defined(__x86_64__) || defined(_M_X64)
TEST_CASE("avx2 dtw kernel is bit-identical to scalar on edge shapes") {
  if (!level_available(Level::avx2)) {
    MESSAGE("avx2 unavailable on this host; skipping");
    return;
  }
  Rng rng(17);
  const std::size_t shapes[][2] = {{1, 1}, {1, 5}, {5, 1}, {2, 2}, {3, 7},
                                   {4, 4}, {8, 8}, {9, 33}, {64, 64}, {1, 64}};
  for (const auto& s : shapes) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = random_series(rng, s[0]);
      const auto b = random_series(rng, s[1]);
      const double ref =
          dtw_cost_scalar(a.data(), a.size(), b.data(), b.size());
      const double got = dtw_cost_avx2(a.data(), a.size(), b.data(), b.size());
      CHECK(bit_equal(ref, got));
    }
  }
}

TEST_CASE("avx2 sqdist agrees with scalar within tolerance") {
  if (!level_available(Level::avx2)) {
    MESSAGE("avx2 unavailable on this host; skipping");
    return;
  }
  Rng rng(19);
  for (std::size_t d : {1, 2, 3, 4, 5, 8, 15, 64, 129}) {
    const auto a = random_series(rng, d);
    const auto b = random_series(rng, d);
    const double ref = sqdist_scalar(a.data(), b.data(), d);
    const double got = sqdist_avx2(a.data(), b.data(), d);
    CHECK(got == doctest::Approx(ref).epsilon(1e-12));
  }
}
#endif

#if defined(__aarch64__)
TEST_CASE("neon dtw kernel is bit-identical to scalar on edge shapes") {
  Rng rng(17);
  const std::size_t shapes[][2] = {{1, 1}, {1, 5}, {5, 1}, {2, 2}, {3, 7},
                                   {4, 4}, {8, 8}, {9, 33}, {64, 64}, {1, 64}};
  for (const auto& s : shapes) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto a = random_series(rng, s[0]);
      const auto b = random_series(rng, s[1]);
      const double ref =
          dtw_cost_scalar(a.data(), a.size(), b.data(), b.size());
      const double got = dtw_cost_neon(a.data(), a.size(), b.data(), b.size());
      CHECK(bit_equal(ref, got));
    }
  }
}
#endif

TEST_CASE("sqdist oracle and dispatch") {
  const double a[] = {1.0, 2.0, 3.0};
  const double z[] = {0.0, 0.0, 0.0};
  CHECK(sqdist_scalar(a, z, 3) == doctest::Approx(14.0).epsilon(1e-15));
  CHECK(sqdist(a, z, 3) == doctest::Approx(14.0).epsilon(1e-12));
  CHECK(sqdist_scalar(a, a, 3) == 0.0);
}

TEST_CASE("level names and availability") {
  CHECK(std::string(level_name(Level::scalar)) == "scalar");
  CHECK(std::string(level_name(Level::avx2)) == "avx2");
  CHECK(std::string(level_name(Level::neon)) == "neon");
  CHECK(level_available(Level::scalar));
  CHECK(level_available(active_level()));
}
