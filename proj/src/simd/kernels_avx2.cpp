#include <immintrin.h>

#include <algorithm>
#include <limits>
#include <vector>

#include "simfuse/simd/kernels.hpp"

// Anti-diagonal (wavefront) DTW: cells on diagonal k depend only on diagonals
// k-1 and k-2, so a whole diagonal can be computed with 4-wide vectors.  The
// second sequence is kept reversed so the per-diagonal cost loads stay
// contiguous.  Cost and recurrence use the same sub/mul/min/add operations as
// the scalar kernel (no fma), which keeps the two bit-identical.

namespace simfuse::simd {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

double dtw_cost_avx2(const double* a, std::size_t n, const double* b,
                     std::size_t m) {
  if (n > m) {
    std::swap(a, b);
    std::swap(n, m);
  }
  // rows follow the shorter sequence a; buffers are indexed by row with one
  // sentinel slot on each side.
  std::vector<double> buf(3 * (n + 2), kInf);
  double* d0 = buf.data();            // diagonal k-2
  double* d1 = d0 + (n + 2);          // diagonal k-1
  double* d2 = d1 + (n + 2);          // diagonal k
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
      for (; i + 4 <= hi + 1; i += 4) {
        const __m256d va = _mm256_loadu_pd(a + i);
        const __m256d vb = _mm256_loadu_pd(bb + i);
        const __m256d diff = _mm256_sub_pd(va, vb);
        const __m256d cost = _mm256_mul_pd(diff, diff);
        const __m256d up = _mm256_loadu_pd(d1 + i);
        const __m256d left = _mm256_loadu_pd(d1 + i + 1);
        const __m256d dg = _mm256_loadu_pd(d0 + i);
        const __m256d best = _mm256_min_pd(_mm256_min_pd(up, left), dg);
        _mm256_storeu_pd(d2 + i + 1, _mm256_add_pd(cost, best));
      }
      for (; i <= hi; ++i) {
        const double diff = a[i] - bb[i];
        const double cost = diff * diff;
        const double best =
            std::min(std::min(d1[i], d1[i + 1]), d0[i]);
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
  return d2[n];  // unreachable; loop always returns at klast
}

double sqdist_avx2(const double* a, const double* b, std::size_t d) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= d; i += 4) {
    const __m256d diff =
        _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(diff, diff, acc);
  }
  const __m128d lo = _mm256_castpd256_pd128(acc);
  const __m128d hi = _mm256_extractf128_pd(acc, 1);
  const __m128d sum2 = _mm_add_pd(lo, hi);
  double out = _mm_cvtsd_f64(_mm_add_sd(sum2, _mm_unpackhi_pd(sum2, sum2)));
  for (; i < d; ++i) {
    const double diff = a[i] - b[i];
    out += diff * diff;
  }
  return out;
}

}  // namespace simfuse::simd
