#include <algorithm>
#include <limits>
#include <vector>

#include "simfuse/simd/kernels.hpp"

namespace simfuse::simd {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

inline double sq(double x) { return x * x; }

inline double min3(double a, double b, double c) {
  return std::min(std::min(a, b), c);
}
}  // namespace

double dtw_cost_scalar(const double* a, std::size_t n, const double* b,
                       std::size_t m) {
  if (m > n) {
    std::swap(a, b);
    std::swap(n, m);
  }
  std::vector<double> prev(m), cur(m);

  cur[0] = sq(a[0] - b[0]);
  for (std::size_t j = 1; j < m; ++j) cur[j] = cur[j - 1] + sq(a[0] - b[j]);
  std::swap(prev, cur);

  for (std::size_t i = 1; i < n; ++i) {
    cur[0] = prev[0] + sq(a[i] - b[0]);
    for (std::size_t j = 1; j < m; ++j) {
      cur[j] = sq(a[i] - b[j]) + min3(prev[j], cur[j - 1], prev[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

double dtw_cost_banded_scalar(const double* a, std::size_t n, const double* b,
                              std::size_t m, std::size_t band) {
  if (m > n) {
    std::swap(a, b);
    std::swap(n, m);
  }
  std::vector<double> prev(m + 1, kInf), cur(m + 1, kInf);

  auto lo_of = [&](std::size_t i) {
    return i > band ? i - band : std::size_t{0};
  };
  auto hi_of = [&](std::size_t i) { return std::min(m - 1, i + band); };

  cur[0] = sq(a[0] - b[0]);
  for (std::size_t j = 1; j <= hi_of(0); ++j)
    cur[j] = cur[j - 1] + sq(a[0] - b[j]);
  if (hi_of(0) + 1 < m) cur[hi_of(0) + 1] = kInf;
  std::swap(prev, cur);

  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t lo = lo_of(i), hi = hi_of(i);
    if (lo > 0) cur[lo - 1] = kInf;
    for (std::size_t j = lo; j <= hi; ++j) {
      const double left = j > 0 ? cur[j - 1] : kInf;
      const double diag = j > 0 ? prev[j - 1] : kInf;
      cur[j] = sq(a[i] - b[j]) + min3(prev[j], left, diag);
    }
    if (hi + 1 < m) cur[hi + 1] = kInf;
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

double sqdist_scalar(const double* a, const double* b, std::size_t d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double diff = a[i] - b[i];
    acc += diff * diff;
  }
  return acc;
}

}  // namespace simfuse::simd
