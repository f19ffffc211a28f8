#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace simfuse {

enum class Target { cad, chf };

const char* target_name(Target t);
Target target_from_name(const std::string& name);

enum class FeatureKind { numeric, categorical_binary };

struct FeatureSpec {
  std::string name;
  FeatureKind kind;
};

struct TimeSeries {
  std::vector<double> timestamps;  // seconds since admission, strictly increasing
  std::vector<double> values;
};

struct PatientRecord {
  std::string id;
  std::vector<double> statics;  // aligned with Cohort::schema
  int label_cad = 0;
  int label_chf = 0;
  std::map<std::string, TimeSeries> series;  // variate_id -> series
};

struct Split {
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

class Cohort {
 public:
  std::vector<FeatureSpec> schema;
  std::vector<PatientRecord> records;
  std::optional<Split> split;

  void rebuild_index();
  const PatientRecord* find(const std::string& id) const;
  PatientRecord* find_mut(const std::string& id);
  const PatientRecord& at(const std::string& id) const;
  int label(const std::string& id, Target t) const;

  std::size_t feature_index(const std::string& name) const;

  // Sorted union of variate ids across all records.
  std::vector<std::string> variate_ids() const;

  // FNV-1a over schema, ids, statics, labels, and series, in record order.
  std::uint64_t fingerprint() const;

 private:
  std::unordered_map<std::string, std::size_t> index_;
};

// Deterministic shuffled split: round(test_fraction * N) test records, the
// rest train.  Both sides keep the shuffled order.
Split split_cohort(const Cohort& c, double test_fraction, std::uint64_t seed);

// Drops samples with timestamp > hours * 3600; records whose series become
// empty lose that series entirely.
Cohort truncate_series(const Cohort& c, double hours);

// The canonical static schema used by cohort files.
std::vector<FeatureSpec> static_schema();

}  // namespace simfuse
