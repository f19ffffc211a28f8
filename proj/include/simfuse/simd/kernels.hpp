#pragma once

#include <cstddef>

// Hot inner loops behind the engine: the DTW accumulated-cost recurrence and
// the squared euclidean distance used by every clustering algorithm.  Each
// kernel has a scalar reference implementation plus vector variants that are
// picked at runtime.  The DTW variants must agree bit for bit with the scalar
// reference (every cell applies the same sub/mul/min/add sequence and there is
// no reduction); sqdist variants reorder the summation and are only required
// to agree within a small tolerance.

namespace simfuse::simd {

enum class Level { scalar, avx2, neon };

// Active kernel level: detected from the CPU, overridable with the
// SIMFUSE_SIMD environment variable ("scalar", "avx2", "neon").  Requesting a
// level the machine cannot run falls back to scalar with a warning on stderr.
Level active_level();
const char* level_name(Level lvl);
bool level_available(Level lvl);

// Accumulated DTW cost (no final sqrt), squared-difference local cost,
// unconstrained warping path.  Preconditions: n >= 1, m >= 1.
double dtw_cost(const double* a, std::size_t n, const double* b, std::size_t m);
double dtw_cost_scalar(const double* a, std::size_t n, const double* b,
                       std::size_t m);

// Banded variant (|i - j| <= band).  Scalar only; the dispatcher routes banded
// calls here.  Precondition: band >= |n - m| so a path exists.
double dtw_cost_banded_scalar(const double* a, std::size_t n, const double* b,
                              std::size_t m, std::size_t band);

// Squared euclidean distance between two d-vectors.
double sqdist(const double* a, const double* b, std::size_t d);
double sqdist_scalar(const double* a, const double* b, std::size_t d);

#if defined(__x86_64__) || defined(_M_X64)
double dtw_cost_avx2(const double* a, std::size_t n, const double* b,
                     std::size_t m);
double sqdist_avx2(const double* a, const double* b, std::size_t d);
#endif

#if defined(__aarch64__)
double dtw_cost_neon(const double* a, std::size_t n, const double* b,
                     std::size_t m);
double sqdist_neon(const double* a, const double* b, std::size_t d);
#endif

}  // namespace simfuse::simd
