#pragma once

#include <string>

#include "simfuse/cohort.hpp"

namespace simfuse {

// On-disk cohort layout:
//   <dir>/static.csv   patient_id,age,weight,height,gender,admission_type,cad,chf
//   <dir>/series/<variate_id>.csv   patient_id,timestamp_s,value
// Series rows are grouped by patient with strictly increasing timestamps.
Cohort load_cohort(const std::string& static_path,
                   const std::string& series_dir);
Cohort load_cohort_dir(const std::string& dir);
void write_cohort(const Cohort& c, const std::string& dir);

}  // namespace simfuse
