#pragma once

#include <cstdint>

#include "simfuse/cohort.hpp"

namespace simfuse {

// Synthetic cohort with a latent two-class structure.  Every class-coupled
// effect (label agreement, admission type, age/weight shifts, per-variate
// level shifts, oscillation period) scales with signal_strength; at 0 the
// labels are fair coins independent of all generated data.
struct SyntheticConfig {
  std::size_t n_patients = 500;
  std::size_t n_variates = 4;  // first n_variates of the canonical catalog
  std::size_t series_len = 100;
  double signal_strength = 1.0;
  std::uint64_t seed = 1;
  double missing_frac = 0.15;     // P(a patient lacks a given variate)
  double sample_interval_s = 600.0;
};

Cohort generate_synthetic_cohort(const SyntheticConfig& cfg);

// Canonical variate catalog (18 monitored vitals / device settings).
std::vector<std::string> synthetic_variate_catalog();

}  // namespace simfuse
