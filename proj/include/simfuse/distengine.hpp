#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "simfuse/cluster.hpp"
#include "simfuse/cohort.hpp"
#include "simfuse/dtw.hpp"

namespace simfuse {

// One task = one variate crossed with a block of targets; candidate lists are
// resolved at planning time so workers only need the cohort series.
struct TaskSpec {
  std::int64_t task_id = 0;
  std::string variate_id;
  std::vector<std::string> target_ids;
  std::vector<std::vector<std::string>> candidates;  // parallel to targets
};

struct JobManifest {
  std::string cohort_fingerprint;  // hex
  DtwConfig dtw;
  int block_size = 25;
  std::vector<std::string> variates;  // plan order
  std::vector<TaskSpec> tasks;
};

JobManifest plan_job(const Cohort& c, const std::vector<std::string>& variates,
                     const std::vector<std::string>& targets,
                     const ClusterAssignment& assignment, const DtwConfig& cfg,
                     int block_size,
                     const std::vector<std::string>* candidate_pool = nullptr);

std::string manifest_to_json(const JobManifest& m);
JobManifest manifest_from_json(const std::string& text);

// Distances per task, aligned with the task's target/candidate lists.
using TaskRows = std::vector<std::vector<double>>;

// Merge is keyed by task id and rebuilds one block per variate in plan
// order, so the merged result is independent of who computed what and when.
std::vector<VariateDistanceBlock> merge_results(
    const JobManifest& m, const std::vector<TaskRows>& rows_by_task);

// In-process thread pool.  The worker count only affects scheduling; the
// merged blocks are identical for any worker count.
std::vector<VariateDistanceBlock> run_local(const JobManifest& m,
                                            const Cohort& c, int workers);

struct DistOptions {
  double task_timeout_s = 60.0;
  int retry_budget = 3;        // re-dispatches allowed per task
  double register_wait_s = 10.0;
  int min_workers = 1;         // dispatch gate; >=1 registration is mandatory
  std::function<void(int)> on_listening;  // reports the bound port (":0" binds)
};

// Coordinator: listens on listen_addr ("HOST:PORT", empty host = all
// interfaces), dispatches tasks to registered workers at-least-once,
// reassigns stragglers past the task timeout, and fails the job once a task
// exhausts its retry budget (JobIncomplete) or no worker ever registers
// (NoWorkersAvailable).
std::vector<VariateDistanceBlock> run_distributed(const JobManifest& m,
                                                  const std::string& listen_addr,
                                                  const DistOptions& opt = {});

// Worker: dials the coordinator, registers with its cohort fingerprint,
// serves tasks until the connection drops, then reconnects forever.  `stop`
// (when given) makes the loop exit for in-process use.
void worker_serve(const std::string& coordinator_addr, const Cohort& cohort,
                  const std::atomic<bool>* stop = nullptr);

}  // namespace simfuse
