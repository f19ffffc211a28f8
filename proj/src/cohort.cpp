#include "simfuse/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "simfuse/error.hpp"
#include "simfuse/hash.hpp"
#include "simfuse/rng.hpp"

namespace simfuse {

const char* target_name(Target t) { return t == Target::cad ? "cad" : "chf"; }

Target target_from_name(const std::string& name) {
  if (name == "cad") return Target::cad;
  if (name == "chf") return Target::chf;
  throw Error(Errc::invalid_parameter, "unknown target '" + name + "'");
}

std::vector<FeatureSpec> static_schema() {
  return {{"age", FeatureKind::numeric},
          {"weight", FeatureKind::numeric},
          {"height", FeatureKind::numeric},
          {"gender", FeatureKind::categorical_binary},
          {"admission_type", FeatureKind::categorical_binary}};
}

void Cohort::rebuild_index() {
  index_.clear();
  index_.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    auto [it, inserted] = index_.emplace(records[i].id, i);
    if (!inserted) {
      throw Error(Errc::duplicate_patient_id,
                  "patient '" + records[i].id + "' appears twice");
    }
  }
}

const PatientRecord* Cohort::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return nullptr;
  return &records[it->second];
}

PatientRecord* Cohort::find_mut(const std::string& id) {
  auto it = index_.find(id);
  if (it == index_.end()) return nullptr;
  return &records[it->second];
}

const PatientRecord& Cohort::at(const std::string& id) const {
  const PatientRecord* r = find(id);
  if (!r) throw Error(Errc::unknown_patient, "patient '" + id + "' not found");
  return *r;
}

int Cohort::label(const std::string& id, Target t) const {
  const PatientRecord& r = at(id);
  return t == Target::cad ? r.label_cad : r.label_chf;
}

std::size_t Cohort::feature_index(const std::string& name) const {
  for (std::size_t i = 0; i < schema.size(); ++i)
    if (schema[i].name == name) return i;
  throw Error(Errc::missing_column, "static feature '" + name + "' not in schema");
}

std::vector<std::string> Cohort::variate_ids() const {
  std::set<std::string> ids;
  for (const auto& r : records)
    for (const auto& [vid, ts] : r.series) ids.insert(vid);
  return {ids.begin(), ids.end()};
}

std::uint64_t Cohort::fingerprint() const {
  Fnv1a h;
  for (const auto& f : schema) {
    h.str(f.name);
    h.u64(f.kind == FeatureKind::numeric ? 0 : 1);
  }
  for (const auto& r : records) {
    h.str(r.id);
    for (double v : r.statics) h.f64(v);
    h.i64(r.label_cad);
    h.i64(r.label_chf);
    for (const auto& [vid, ts] : r.series) {
      h.str(vid);
      h.u64(ts.timestamps.size());
      for (double t : ts.timestamps) h.f64(t);
      for (double v : ts.values) h.f64(v);
    }
  }
  return h.value();
}

Split split_cohort(const Cohort& c, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction >= 0.0 && test_fraction <= 1.0))
    throw Error(Errc::invalid_parameter, "test_fraction must be in [0,1]");
  const std::size_t n = c.records.size();
  if (n < 2) throw Error(Errc::cohort_too_small, "need at least 2 records");
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  Rng rng(seed);
  for (std::size_t i = n - 1; i > 0; --i) {
    const std::size_t j = rng.uniform_index(i + 1);
    std::swap(order[i], order[j]);
  }
  const auto n_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(n)));
  Split s;
  s.test_ids.reserve(n_test);
  s.train_ids.reserve(n - n_test);
  for (std::size_t i = 0; i < n; ++i) {
    const std::string& id = c.records[order[i]].id;
    if (i < n_test) {
      s.test_ids.push_back(id);
    } else {
      s.train_ids.push_back(id);
    }
  }
  return s;
}

Cohort truncate_series(const Cohort& c, double hours) {
  if (!(hours > 0.0))
    throw Error(Errc::invalid_parameter, "observation window must be > 0");
  const double cutoff = hours * 3600.0;
  Cohort out;
  out.schema = c.schema;
  out.split = c.split;
  out.records.reserve(c.records.size());
  for (const auto& r : c.records) {
    PatientRecord nr;
    nr.id = r.id;
    nr.statics = r.statics;
    nr.label_cad = r.label_cad;
    nr.label_chf = r.label_chf;
    for (const auto& [vid, ts] : r.series) {
      TimeSeries cut;
      for (std::size_t i = 0; i < ts.timestamps.size(); ++i) {
        if (ts.timestamps[i] <= cutoff) {
          cut.timestamps.push_back(ts.timestamps[i]);
          cut.values.push_back(ts.values[i]);
        }
      }
      if (!cut.values.empty()) nr.series.emplace(vid, std::move(cut));
    }
    out.records.push_back(std::move(nr));
  }
  out.rebuild_index();
  return out;
}

}  // namespace simfuse
