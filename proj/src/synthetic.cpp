#include "simfuse/synthetic.hpp"

#include <cmath>
#include <cstdio>

#include "simfuse/error.hpp"
#include "simfuse/rng.hpp"

namespace simfuse {

namespace {

struct VariateParams {
  const char* name;
  double base;    // population mean level
  double noise;   // per-sample gaussian noise sd
  double amp;     // oscillation amplitude
  double shift;   // class level shift per unit signal strength
};

// Order matters: small cohorts use a prefix of this catalog.
constexpr VariateParams kCatalog[] = {
    {"glucose", 140.0, 25.0, 12.0, 2.5},
    {"heart_rate", 85.0, 12.0, 6.0, 1.2},
    {"abp_systolic", 125.0, 15.0, 7.5, 1.5},
    {"resp_rate", 18.0, 4.0, 2.0, 0.4},
    {"abp_diastolic", 70.0, 10.0, 5.0, 1.0},
    {"abp_mean", 88.0, 11.0, 5.5, 1.1},
    {"body_temp", 37.0, 0.5, 0.25, 0.05},
    {"cvp", 8.0, 3.0, 1.5, 0.3},
    {"pap_systolic", 35.0, 8.0, 4.0, 0.8},
    {"pap_diastolic", 15.0, 5.0, 2.5, 0.5},
    {"pap_mean", 22.0, 6.0, 3.0, 0.6},
    {"o2_flow", 4.0, 1.5, 0.75, 0.15},
    {"minute_volume", 7.0, 1.8, 0.9, 0.18},
    {"peak_insp_pressure", 22.0, 5.0, 2.5, 0.5},
    {"mean_airway_pressure", 10.0, 2.5, 1.25, 0.25},
    {"heart_rate_alarm_low", 55.0, 6.0, 0.0, 0.6},
    {"resp_alarm_high", 30.0, 5.0, 0.0, 0.5},
    {"resp_rate_set", 14.0, 3.0, 0.0, 0.3},
};
constexpr std::size_t kCatalogSize = sizeof(kCatalog) / sizeof(kCatalog[0]);

// Class coupling strengths (per unit signal).
constexpr double kLabelCoupling = 1.6;      // label flip p = 0.5 e^{-1.6 s}
constexpr double kAdmissionCoupling = 1.4;  // admission flip p = 0.5 e^{-1.4 s}
constexpr double kAgeShift = 3.2;
constexpr double kWeightShift = 2.4;
constexpr double kPeriodBase = 7700.0;   // seconds
constexpr double kPeriodCoupling = 0.06; // period = base * e^{+-0.06 s}

}  // namespace

std::vector<std::string> synthetic_variate_catalog() {
  std::vector<std::string> out;
  out.reserve(kCatalogSize);
  for (const auto& v : kCatalog) out.emplace_back(v.name);
  return out;
}

Cohort generate_synthetic_cohort(const SyntheticConfig& cfg) {
  if (cfg.n_patients < 2)
    throw Error(Errc::invalid_parameter, "n_patients must be >= 2");
  if (cfg.n_variates < 1 || cfg.n_variates > kCatalogSize)
    throw Error(Errc::invalid_parameter,
                "n_variates must be in [1," + std::to_string(kCatalogSize) +
                    "]");
  if (cfg.series_len < 1)
    throw Error(Errc::invalid_parameter, "series_len must be >= 1");
  if (!(cfg.signal_strength >= 0.0))
    throw Error(Errc::invalid_parameter, "signal_strength must be >= 0");
  if (!(cfg.missing_frac >= 0.0 && cfg.missing_frac < 1.0))
    throw Error(Errc::invalid_parameter, "missing_frac must be in [0,1)");
  if (!(cfg.sample_interval_s > 0.0))
    throw Error(Errc::invalid_parameter, "sample_interval_s must be > 0");

  const double s = cfg.signal_strength;
  const double p_label_flip = 0.5 * std::exp(-kLabelCoupling * s);
  const double p_admission_flip = 0.5 * std::exp(-kAdmissionCoupling * s);

  Rng rng(cfg.seed);
  Cohort c;
  c.schema = static_schema();
  c.records.reserve(cfg.n_patients);

  int id_width = 1;
  for (std::size_t v = cfg.n_patients; v >= 10; v /= 10) ++id_width;

  for (std::size_t p = 0; p < cfg.n_patients; ++p) {
    PatientRecord r;
    char buf[32];
    std::snprintf(buf, sizeof buf, "p%0*zu", id_width, p + 1);
    r.id = buf;

    const bool z = rng.bernoulli(0.5);
    const double zc = z ? 1.0 : -1.0;
    r.label_cad = static_cast<int>(z) ^ static_cast<int>(rng.bernoulli(p_label_flip));
    r.label_chf = static_cast<int>(z) ^ static_cast<int>(rng.bernoulli(p_label_flip));
    const int admission =
        static_cast<int>(z) ^ static_cast<int>(rng.bernoulli(p_admission_flip));
    const int gender = static_cast<int>(rng.bernoulli(0.5));

    const double age = rng.normal(62.0, 14.0) + kAgeShift * s * zc;
    const double weight = rng.normal(80.0, 15.0) + kWeightShift * s * zc;
    const double height = rng.normal(170.0, 10.0);
    r.statics = {age, weight, height, static_cast<double>(gender),
                 static_cast<double>(admission)};

    const double period = kPeriodBase * std::exp(kPeriodCoupling * s * zc);
    for (std::size_t v = 0; v < cfg.n_variates; ++v) {
      const VariateParams& vp = kCatalog[v];
      const bool present = !rng.bernoulli(cfg.missing_frac);
      const double phase = rng.uniform() * 2.0 * M_PI;
      TimeSeries ts;
      if (present) {
        ts.timestamps.reserve(cfg.series_len);
        ts.values.reserve(cfg.series_len);
      }
      for (std::size_t k = 0; k < cfg.series_len; ++k) {
        const double noise = rng.normal(0.0, vp.noise);
        if (!present) continue;  // draws still consumed: layout independent
        const double t = (static_cast<double>(k) + 1.0) * cfg.sample_interval_s;
        const double level = vp.base + vp.shift * s * zc;
        const double wave = vp.amp * std::sin(2.0 * M_PI * t / period + phase);
        ts.timestamps.push_back(t);
        ts.values.push_back(level + wave + noise);
      }
      if (present) r.series.emplace(vp.name, std::move(ts));
    }
    c.records.push_back(std::move(r));
  }
  c.rebuild_index();
  return c;
}

}  // namespace simfuse
