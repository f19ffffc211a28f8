#pragma once

#include <stdexcept>
#include <string>

namespace simfuse {

enum class Errc {
  // input / cohort
  missing_column,
  non_binary_label,
  non_monotone_timestamps,
  duplicate_patient_id,
  unknown_patient,
  cohort_too_small,
  invalid_parameter,
  // transform
  no_positive_events,
  no_negative_events,
  degenerate_feature,
  // clustering
  empty_input,
  eigendecomposition_failure,
  // dtw
  empty_series,
  infeasible_band,
  series_too_long,
  // distributed engine
  empty_job,
  no_workers_available,
  job_incomplete,
  fingerprint_mismatch,
  connection_failed,
  // fusion / eval
  unknown_target,
  single_class_input,
  malformed_predictions,
  io_failure,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::missing_column: return "MissingColumn";
    case Errc::non_binary_label: return "NonBinaryLabel";
    case Errc::non_monotone_timestamps: return "NonMonotoneTimestamps";
    case Errc::duplicate_patient_id: return "DuplicatePatientId";
    case Errc::unknown_patient: return "UnknownPatient";
    case Errc::cohort_too_small: return "CohortTooSmall";
    case Errc::invalid_parameter: return "InvalidParameter";
    case Errc::no_positive_events: return "NoPositiveEvents";
    case Errc::no_negative_events: return "NoNegativeEvents";
    case Errc::degenerate_feature: return "DegenerateFeature";
    case Errc::empty_input: return "EmptyInput";
    case Errc::eigendecomposition_failure: return "EigendecompositionFailure";
    case Errc::empty_series: return "EmptySeries";
    case Errc::infeasible_band: return "InfeasibleBand";
    case Errc::series_too_long: return "SeriesTooLong";
    case Errc::empty_job: return "EmptyJob";
    case Errc::no_workers_available: return "NoWorkersAvailable";
    case Errc::job_incomplete: return "JobIncomplete";
    case Errc::fingerprint_mismatch: return "FingerprintMismatch";
    case Errc::connection_failed: return "ConnectionFailed";
    case Errc::unknown_target: return "UnknownTarget";
    case Errc::single_class_input: return "SingleClassInput";
    case Errc::malformed_predictions: return "MalformedPredictions";
    case Errc::io_failure: return "IoFailure";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

}  // namespace simfuse
