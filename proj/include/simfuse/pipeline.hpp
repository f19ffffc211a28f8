#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "simfuse/cluster.hpp"
#include "simfuse/cohort.hpp"
#include "simfuse/eval.hpp"
#include "simfuse/transform.hpp"

namespace simfuse {

struct RunConfig {
  Target target = Target::cad;
  DtMethod dt_method = DtMethod::awoe;
  ClusterAlgo clustering = ClusterAlgo::kmeans;
  int k_clusters = 0;  // 0 = target default (cad 125, chf 150)
  int lambda = 1;
  int q = 20;
  double epsilon = 1e-4;
  std::optional<int> dtw_band;
  std::uint64_t seed = 1;
  double test_fraction = 0.2;
  int block_size = 25;
  std::optional<double> observation_hours;
  std::optional<double> spectral_gamma;
  int optics_min_samples = 5;
  std::optional<double> optics_eps;

  // execution topology; never part of the run hash
  int workers = 1;
  std::optional<std::string> listen;  // set = distributed coordinator mode
  int min_workers = 1;
  double task_timeout_s = 60.0;
  int retry_budget = 3;
};

int effective_k(const RunConfig& cfg);

// Canonical JSON of every result-affecting field (topology excluded).
std::string config_json(const RunConfig& cfg);

// Run directory name: FNV-1a over the canonical config and the cohort
// fingerprint, so identical inputs land in the same directory.
std::string run_hash(const RunConfig& cfg, const Cohort& cohort);

// --run-dir flag, else SIMFUSE_RUN_DIR, else "runs".
std::string resolve_run_root(const std::optional<std::string>& cli_run_root);

struct RunOutput {
  ResultsRow row;
  std::string run_dir;
  bool reused = false;  // report already existed; run was a no-op
};

// Full pipeline: split, window truncation, static transform, clustering,
// DTW blocks (local pool or distributed), fusion, prediction, evaluation.
// Artifacts land in <run_root>/<hash>/ and the results ledger row is
// appended to <run_root>/results.csv (skipped on no-op reruns).
RunOutput run_pipeline(const Cohort& cohort, const RunConfig& cfg,
                       const std::string& run_root, bool force = false);

struct BenchResult {
  std::size_t n_patients = 0;
  std::size_t series_len = 0;
  int workers = 0;
  double seconds = 0.0;
};

// Full-pairwise single-variate DTW job on a synthetic cohort; measures the
// block-computation phase only.
BenchResult bench_dtw(std::size_t n_patients, std::size_t series_len,
                      int workers, std::uint64_t seed = 42);

void append_bench_csv(const BenchResult& r, const std::string& path);

}  // namespace simfuse
