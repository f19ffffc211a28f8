#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "simfuse/cluster.hpp"
#include "simfuse/cohort.hpp"

namespace simfuse {

// Squared-difference local cost, optional Sakoe-Chiba band |i-j| <= band,
// and a final square root over the accumulated path cost.
struct DtwConfig {
  std::optional<int> band;
  bool final_sqrt = true;
};

double dtw_distance(std::span<const double> a, std::span<const double> b,
                    const DtwConfig& cfg = {});

// Exhaustive path enumeration for oracle checks; lengths must be <= 8.
double dtw_distance_bruteforce(std::span<const double> a,
                               std::span<const double> b,
                               const DtwConfig& cfg = {});

// One unit of distributed work: DTW distances for one variate from each
// target to its candidates.  NaN marks a missing pairing (either side lacks
// the variate); missing pairs are omitted from the CSV form.
struct VariateDistanceBlock {
  std::string variate_id;
  std::vector<std::string> target_ids;
  std::vector<std::vector<std::string>> candidate_ids;  // per target
  std::vector<std::vector<double>> distances;           // per target
};

VariateDistanceBlock compute_block_rows(
    const Cohort& c, const std::string& variate_id,
    const std::vector<std::string>& targets,
    const std::vector<std::vector<std::string>>& candidates_per_target,
    const DtwConfig& cfg);

// Candidates are the target's same-cluster members intersected with
// `candidate_pool` (when given), minus the target, ascending by id.
VariateDistanceBlock compute_block(
    const Cohort& c, const std::string& variate_id,
    const std::vector<std::string>& targets,
    const ClusterAssignment& assignment, const DtwConfig& cfg,
    const std::vector<std::string>* candidate_pool = nullptr);

void write_blocks_csv(const std::vector<VariateDistanceBlock>& blocks,
                      const std::string& path);
std::string blocks_to_csv(const std::vector<VariateDistanceBlock>& blocks);

}  // namespace simfuse
