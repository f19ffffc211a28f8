#include "simfuse/dtw.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <unordered_set>

#include "simfuse/csv.hpp"
#include "simfuse/error.hpp"
#include "simfuse/simd/kernels.hpp"

namespace simfuse {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate_inputs(std::span<const double> a, std::span<const double> b,
                     const DtwConfig& cfg) {
  if (a.empty() || b.empty())
    throw Error(Errc::empty_series, "dtw over an empty series");
  if (cfg.band) {
    if (*cfg.band < 0)
      throw Error(Errc::invalid_parameter, "dtw band must be >= 0");
    const auto gap = static_cast<long long>(a.size() > b.size()
                                                ? a.size() - b.size()
                                                : b.size() - a.size());
    if (*cfg.band < gap)
      throw Error(Errc::infeasible_band,
                  "band " + std::to_string(*cfg.band) +
                      " below length gap " + std::to_string(gap));
  }
}
}  // namespace

double dtw_distance(std::span<const double> a, std::span<const double> b,
                    const DtwConfig& cfg) {
  validate_inputs(a, b, cfg);
  double cost;
  if (cfg.band) {
    cost = simd::dtw_cost_banded_scalar(a.data(), a.size(), b.data(), b.size(),
                                        static_cast<std::size_t>(*cfg.band));
  } else {
    cost = simd::dtw_cost(a.data(), a.size(), b.data(), b.size());
  }
  return cfg.final_sqrt ? std::sqrt(cost) : cost;
}

namespace {
double enumerate_paths(std::span<const double> a, std::span<const double> b,
                       std::size_t i, std::size_t j,
                       const std::optional<int>& band) {
  if (band) {
    const auto diff = i > j ? i - j : j - i;
    if (diff > static_cast<std::size_t>(*band)) return kInf;
  }
  const double d = (a[i] - b[j]) * (a[i] - b[j]);
  const bool last_i = i + 1 == a.size(), last_j = j + 1 == b.size();
  if (last_i && last_j) return d;
  double best = kInf;
  if (!last_i) best = std::min(best, enumerate_paths(a, b, i + 1, j, band));
  if (!last_j) best = std::min(best, enumerate_paths(a, b, i, j + 1, band));
  if (!last_i && !last_j)
    best = std::min(best, enumerate_paths(a, b, i + 1, j + 1, band));
  return d + best;
}
}  // namespace

double dtw_distance_bruteforce(std::span<const double> a,
                               std::span<const double> b,
                               const DtwConfig& cfg) {
  validate_inputs(a, b, cfg);
  if (a.size() > 8 || b.size() > 8)
    throw Error(Errc::series_too_long,
                "brute-force oracle only enumerates lengths <= 8");
  const double cost = enumerate_paths(a, b, 0, 0, cfg.band);
  return cfg.final_sqrt ? std::sqrt(cost) : cost;
}

VariateDistanceBlock compute_block_rows(
    const Cohort& c, const std::string& variate_id,
    const std::vector<std::string>& targets,
    const std::vector<std::vector<std::string>>& candidates_per_target,
    const DtwConfig& cfg) {
  if (targets.size() != candidates_per_target.size())
    throw Error(Errc::invalid_parameter,
                "targets/candidates arity mismatch in block for " + variate_id);
  VariateDistanceBlock block;
  block.variate_id = variate_id;
  block.target_ids = targets;
  block.candidate_ids = candidates_per_target;
  block.distances.resize(targets.size());

  for (std::size_t t = 0; t < targets.size(); ++t) {
    const PatientRecord& target = c.at(targets[t]);
    const auto target_series = target.series.find(variate_id);
    auto& row = block.distances[t];
    row.reserve(candidates_per_target[t].size());
    for (const std::string& cand_id : candidates_per_target[t]) {
      const PatientRecord& cand = c.at(cand_id);
      const auto cand_series = cand.series.find(variate_id);
      if (target_series == target.series.end() ||
          cand_series == cand.series.end()) {
        row.push_back(kNaN);
        continue;
      }
      try {
        row.push_back(dtw_distance(target_series->second.values,
                                   cand_series->second.values, cfg));
      } catch (const Error& e) {
        std::fprintf(stderr, "simfuse: dtw %s %s/%s failed: %s\n",
                     variate_id.c_str(), targets[t].c_str(), cand_id.c_str(),
                     e.what());
        row.push_back(kNaN);
      }
    }
  }
  return block;
}

VariateDistanceBlock compute_block(
    const Cohort& c, const std::string& variate_id,
    const std::vector<std::string>& targets,
    const ClusterAssignment& assignment, const DtwConfig& cfg,
    const std::vector<std::string>* candidate_pool) {
  std::optional<std::unordered_set<std::string>> pool;
  if (candidate_pool)
    pool.emplace(candidate_pool->begin(), candidate_pool->end());

  std::vector<std::vector<std::string>> candidates;
  candidates.reserve(targets.size());
  for (const std::string& target : targets) {
    std::vector<std::string> cands = cluster_of(assignment, target);
    if (pool) {
      std::erase_if(cands,
                    [&](const std::string& id) { return !pool->count(id); });
    }
    std::sort(cands.begin(), cands.end());
    candidates.push_back(std::move(cands));
  }
  return compute_block_rows(c, variate_id, targets, candidates, cfg);
}

std::string blocks_to_csv(const std::vector<VariateDistanceBlock>& blocks) {
  std::string out = "variate_id,target_id,candidate_id,distance\n";
  for (const auto& b : blocks) {
    for (std::size_t t = 0; t < b.target_ids.size(); ++t) {
      for (std::size_t k = 0; k < b.candidate_ids[t].size(); ++k) {
        const double d = b.distances[t][k];
        if (std::isnan(d)) continue;
        out += b.variate_id;
        out += ',';
        out += b.target_ids[t];
        out += ',';
        out += b.candidate_ids[t][k];
        out += ',';
        out += csv::format_double(d);
        out += '\n';
      }
    }
  }
  return out;
}

void write_blocks_csv(const std::vector<VariateDistanceBlock>& blocks,
                      const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io_failure, "cannot write " + path);
  f << blocks_to_csv(blocks);
}

}  // namespace simfuse
