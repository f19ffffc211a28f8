#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "simfuse/simd/kernels.hpp"

namespace simfuse::simd {

const char* level_name(Level lvl) {
  switch (lvl) {
    case Level::scalar: return "scalar";
    case Level::avx2: return "avx2";
    case Level::neon: return "neon";
  }
  return "?";
}

bool level_available(Level lvl) {
  switch (lvl) {
    case Level::scalar:
      return true;
    case Level::avx2:
#if defined(__x86_64__) || defined(_M_X64)
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Level::neon:
#if defined(__aarch64__)
      return true;
#else
      return false;
#endif
  }
  return false;
}

namespace {

Level detect_level() {
  if (level_available(Level::avx2)) return Level::avx2;
  if (level_available(Level::neon)) return Level::neon;
  return Level::scalar;
}

Level resolve_level() {
  Level lvl = detect_level();
  if (const char* env = std::getenv("SIMFUSE_SIMD")) {
    Level want = lvl;
    bool known = true;
    if (std::strcmp(env, "scalar") == 0) {
      want = Level::scalar;
    } else if (std::strcmp(env, "avx2") == 0) {
      want = Level::avx2;
    } else if (std::strcmp(env, "neon") == 0) {
      want = Level::neon;
    } else {
      known = false;
      std::fprintf(stderr,
                   "simfuse: unknown SIMFUSE_SIMD value '%s', using %s\n", env,
                   level_name(lvl));
    }
    if (known) {
      if (level_available(want)) {
        lvl = want;
      } else {
        std::fprintf(
            stderr,
            "simfuse: SIMFUSE_SIMD=%s not supported on this cpu, using "
            "scalar\n",
            env);
        lvl = Level::scalar;
      }
    }
  }
  return lvl;
}

}  // namespace

Level active_level() {
  static const Level lvl = resolve_level();
  return lvl;
}

double dtw_cost(const double* a, std::size_t n, const double* b,
                std::size_t m) {
  switch (active_level()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::avx2:
      return dtw_cost_avx2(a, n, b, m);
#endif
#if defined(__aarch64__)
    case Level::neon:
      return dtw_cost_neon(a, n, b, m);
#endif
    default:
      return dtw_cost_scalar(a, n, b, m);
  }
}

double sqdist(const double* a, const double* b, std::size_t d) {
  switch (active_level()) {
#if defined(__x86_64__) || defined(_M_X64)
    case Level::avx2:
      return sqdist_avx2(a, b, d);
#endif
#if defined(__aarch64__)
    case Level::neon:
      return sqdist_neon(a, b, d);
#endif
    default:
      return sqdist_scalar(a, b, d);
  }
}

}  // namespace simfuse::simd
