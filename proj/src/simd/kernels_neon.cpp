#include <arm_neon.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "simfuse/simd/kernels.hpp"

// 2-wide NEON twin of the AVX2 wavefront kernel; see kernels_avx2.cpp for the
// diagonal bookkeeping.

namespace simfuse::simd {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double dtw_cost_neon(const double* a, std::size_t n, const double* b,
                     std::size_t m) {
  if (n > m) {
    std::swap(a, b);
    std::swap(n, m);
  }
  std::vector<double> buf(3 * (n + 2), kInf);
  double* d0 = buf.data();
  double* d1 = d0 + (n + 2);
  double* d2 = d1 + (n + 2);
  std::vector<double> brev(m);
  for (std::size_t t = 0; t < m; ++t) brev[t] = b[m - 1 - t];

  const std::size_t klast = n + m - 2;
  for (std::size_t k = 0; k <= klast; ++k) {
    const std::size_t lo = k + 1 > m ? k + 1 - m : 0;
    const std::size_t hi = std::min(n - 1, k);
    if (k == 0) {
      const double diff = a[0] - b[0];
      d2[1] = diff * diff;
    } else {
      const double* bb = brev.data() + (m - 1 - k);
      std::size_t i = lo;
      for (; i + 2 <= hi + 1; i += 2) {
        const float64x2_t va = vld1q_f64(a + i);
        const float64x2_t vb = vld1q_f64(bb + i);
        const float64x2_t diff = vsubq_f64(va, vb);
        const float64x2_t cost = vmulq_f64(diff, diff);
        const float64x2_t up = vld1q_f64(d1 + i);
        const float64x2_t left = vld1q_f64(d1 + i + 1);
        const float64x2_t dg = vld1q_f64(d0 + i);
        const float64x2_t best = vminq_f64(vminq_f64(up, left), dg);
        vst1q_f64(d2 + i + 1, vaddq_f64(cost, best));
      }
      for (; i <= hi; ++i) {
        const double diff = a[i] - bb[i];
        const double cost = diff * diff;
        const double best = std::min(std::min(d1[i], d1[i + 1]), d0[i]);
        d2[i + 1] = cost + best;
      }
    }
    if (k == klast) return d2[n];
    d2[lo] = kInf;
    d2[hi + 2] = kInf;
    double* tmp = d0;
    d0 = d1;
    d1 = d2;
    d2 = tmp;
  }
  return d2[n];
}

double sqdist_neon(const double* a, const double* b, std::size_t d) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= d; i += 2) {
    const float64x2_t diff = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, diff, diff);
  }
  double out = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
  for (; i < d; ++i) {
    const double diff = a[i] - b[i];
    out += diff * diff;
  }
  return out;
}

}  // namespace simfuse::simd
