#include "simfuse/distengine.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <cstdio>
#include <limits>
#include <mutex>
#include <thread>
#include <unordered_set>

#include "json.hpp"
#include "simfuse/error.hpp"
#include "simfuse/hash.hpp"
#include "simfuse/netio.hpp"
#include "simfuse/wire.hpp"

namespace simfuse {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fingerprint_hex(const Cohort& c) {
  Fnv1a h;
  h.u64(c.fingerprint());
  return h.hex();
}
}  // namespace

JobManifest plan_job(const Cohort& c, const std::vector<std::string>& variates,
                     const std::vector<std::string>& targets,
                     const ClusterAssignment& assignment, const DtwConfig& cfg,
                     int block_size,
                     const std::vector<std::string>* candidate_pool) {
  if (variates.empty() || targets.empty())
    throw Error(Errc::empty_job, "job needs at least one variate and target");
  if (block_size < 1)
    throw Error(Errc::invalid_parameter, "block_size must be >= 1");

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

  JobManifest m;
  m.cohort_fingerprint = fingerprint_hex(c);
  m.dtw = cfg;
  m.block_size = block_size;
  m.variates = variates;
  std::int64_t next_id = 0;
  const auto bs = static_cast<std::size_t>(block_size);
  for (const std::string& variate : variates) {
    for (std::size_t start = 0; start < targets.size(); start += bs) {
      const std::size_t stop = std::min(targets.size(), start + bs);
      TaskSpec t;
      t.task_id = next_id++;
      t.variate_id = variate;
      t.target_ids.assign(targets.begin() + start, targets.begin() + stop);
      t.candidates.assign(candidates.begin() + start,
                          candidates.begin() + stop);
      m.tasks.push_back(std::move(t));
    }
  }
  return m;
}

std::string manifest_to_json(const JobManifest& m) {
  nlohmann::json j;
  j["fingerprint"] = m.cohort_fingerprint;
  j["dtw"]["band"] = m.dtw.band ? nlohmann::json(*m.dtw.band)
                                : nlohmann::json(nullptr);
  j["dtw"]["final_sqrt"] = m.dtw.final_sqrt;
  j["block_size"] = m.block_size;
  j["variates"] = m.variates;
  auto& tasks = j["tasks"] = nlohmann::json::array();
  for (const auto& t : m.tasks) {
    nlohmann::json jt;
    jt["task_id"] = t.task_id;
    jt["variate"] = t.variate_id;
    jt["targets"] = t.target_ids;
    jt["candidates"] = t.candidates;
    tasks.push_back(std::move(jt));
  }
  return j.dump(2);
}

JobManifest manifest_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded())
    throw Error(Errc::invalid_parameter, "malformed job manifest json");
  try {
    JobManifest m;
    m.cohort_fingerprint = j.at("fingerprint").get<std::string>();
    if (!j.at("dtw").at("band").is_null())
      m.dtw.band = j.at("dtw").at("band").get<int>();
    m.dtw.final_sqrt = j.at("dtw").at("final_sqrt").get<bool>();
    m.block_size = j.at("block_size").get<int>();
    m.variates = j.at("variates").get<std::vector<std::string>>();
    for (const auto& jt : j.at("tasks")) {
      TaskSpec t;
      t.task_id = jt.at("task_id").get<std::int64_t>();
      t.variate_id = jt.at("variate").get<std::string>();
      t.target_ids = jt.at("targets").get<std::vector<std::string>>();
      t.candidates =
          jt.at("candidates").get<std::vector<std::vector<std::string>>>();
      if (t.candidates.size() != t.target_ids.size())
        throw Error(Errc::invalid_parameter,
                    "task " + std::to_string(t.task_id) +
                        ": candidates/targets arity mismatch");
      m.tasks.push_back(std::move(t));
    }
    if (m.tasks.empty()) throw Error(Errc::empty_job, "manifest has no tasks");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_parameter,
                std::string("malformed job manifest: ") + e.what());
  }
}

std::vector<VariateDistanceBlock> merge_results(
    const JobManifest& m, const std::vector<TaskRows>& rows_by_task) {
  if (rows_by_task.size() != m.tasks.size())
    throw Error(Errc::job_incomplete, "missing task results in merge");

  std::vector<VariateDistanceBlock> blocks;
  blocks.reserve(m.variates.size());
  for (const std::string& variate : m.variates) {
    VariateDistanceBlock b;
    b.variate_id = variate;
    blocks.push_back(std::move(b));
  }
  for (std::size_t ti = 0; ti < m.tasks.size(); ++ti) {
    const TaskSpec& t = m.tasks[ti];
    const TaskRows& rows = rows_by_task[ti];
    if (rows.size() != t.target_ids.size())
      throw Error(Errc::job_incomplete,
                  "task " + std::to_string(t.task_id) + " result arity");
    const auto vit = std::find(m.variates.begin(), m.variates.end(),
                               t.variate_id);
    auto& block = blocks[static_cast<std::size_t>(vit - m.variates.begin())];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r].size() != t.candidates[r].size())
        throw Error(Errc::job_incomplete,
                    "task " + std::to_string(t.task_id) + " row arity");
      block.target_ids.push_back(t.target_ids[r]);
      block.candidate_ids.push_back(t.candidates[r]);
      block.distances.push_back(rows[r]);
    }
  }
  return blocks;
}

namespace {
TaskRows compute_task(const Cohort& c, const TaskSpec& t, const DtwConfig& cfg) {
  const VariateDistanceBlock block =
      compute_block_rows(c, t.variate_id, t.target_ids, t.candidates, cfg);
  return block.distances;
}
}  // namespace

std::vector<VariateDistanceBlock> run_local(const JobManifest& m,
                                            const Cohort& c, int workers) {
  if (m.tasks.empty()) throw Error(Errc::empty_job, "no tasks to run");
  if (workers < 1)
    throw Error(Errc::invalid_parameter, "workers must be >= 1");

  std::vector<TaskRows> results(m.tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mu;

  auto body = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= m.tasks.size() || failed.load()) return;
      try {
        results[i] = compute_task(c, m.tasks[i], m.dtw);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };

  const int n_threads = std::min<int>(workers, static_cast<int>(m.tasks.size()));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int w = 0; w < n_threads; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
  return merge_results(m, results);
}

// ---------------------------------------------------------------------------
// coordinator

namespace {

enum class TaskState { pending, assigned, done };

struct CoordState {
  const JobManifest* manifest = nullptr;
  DistOptions opt;
  std::string digest;

  std::mutex mu;
  std::condition_variable cv;
  std::vector<TaskState> state;
  std::vector<int> attempts;
  std::vector<Clock::time_point> deadline;
  std::vector<TaskRows> results;
  std::size_t done_count = 0;
  bool job_failed = false;
  std::string failure;
  bool shutting_down = false;

  int registered_total = 0;
  int active_workers = 0;
  bool gate_open = false;
  Clock::time_point last_worker_seen = Clock::now();

  bool all_done() const { return done_count == manifest->tasks.size(); }

  void fail(const std::string& why) {
    if (!job_failed) {
      job_failed = true;
      failure = why;
    }
    cv.notify_all();
  }

  // Next pending task, else an expired assigned task; -1 when none.
  std::int64_t acquire_task() {
    const auto now = Clock::now();
    for (std::size_t i = 0; i < state.size(); ++i) {
      const bool expired =
          state[i] == TaskState::assigned && now >= deadline[i];
      if (state[i] == TaskState::pending || expired) {
        if (attempts[i] > opt.retry_budget) {
          fail("task " + std::to_string(manifest->tasks[i].task_id) +
               " exhausted its retry budget");
          return -1;
        }
        attempts[i]++;
        state[i] = TaskState::assigned;
        deadline[i] = now + std::chrono::milliseconds(static_cast<long long>(
                                opt.task_timeout_s * 1000.0));
        return static_cast<std::int64_t>(i);
      }
    }
    return -1;
  }

  void repend(std::int64_t i) {
    if (state[static_cast<std::size_t>(i)] == TaskState::assigned)
      state[static_cast<std::size_t>(i)] = TaskState::pending;
    cv.notify_all();
  }

  bool complete(std::int64_t i, TaskRows rows) {
    auto& st = state[static_cast<std::size_t>(i)];
    if (st == TaskState::done) return false;  // late duplicate, first wins
    st = TaskState::done;
    results[static_cast<std::size_t>(i)] = std::move(rows);
    ++done_count;
    cv.notify_all();
    return true;
  }
};

// Validates a RESULT payload against the task structure and converts it to
// aligned rows; nullopt when the payload does not match the task.
std::optional<TaskRows> rows_from_result(const TaskSpec& t,
                                         const wire::Result& res) {
  std::size_t expected = 0;
  for (const auto& c : t.candidates) expected += c.size();
  if (res.rows.size() != expected) return std::nullopt;
  TaskRows rows(t.target_ids.size());
  std::size_t k = 0;
  for (std::size_t r = 0; r < t.target_ids.size(); ++r) {
    rows[r].reserve(t.candidates[r].size());
    for (std::size_t c = 0; c < t.candidates[r].size(); ++c, ++k) {
      const wire::ResultRow& row = res.rows[k];
      if (row.target != t.target_ids[r] || row.candidate != t.candidates[r][c])
        return std::nullopt;
      rows[r].push_back(row.distance ? *row.distance : kNaN);
    }
  }
  return rows;
}

void serve_worker(CoordState& st, net::Socket sock) {
  // registration
  const auto reg_line = sock.recv_line(5000);
  if (reg_line.status != net::Socket::RecvStatus::line) return;
  const auto reg_msg = wire::decode(reg_line.line);
  const auto* reg =
      reg_msg ? std::get_if<wire::Register>(&*reg_msg) : nullptr;
  if (!reg) return;
  if (reg->fingerprint != st.manifest->cohort_fingerprint) {
    std::fprintf(stderr,
                 "simfuse: rejecting worker %s: cohort fingerprint %s != %s\n",
                 reg->worker.c_str(), reg->fingerprint.c_str(),
                 st.manifest->cohort_fingerprint.c_str());
    return;
  }
  {
    std::lock_guard<std::mutex> lock(st.mu);
    st.registered_total++;
    st.active_workers++;
    st.last_worker_seen = Clock::now();
    if (st.registered_total >= st.opt.min_workers) st.gate_open = true;
    st.cv.notify_all();
  }

  auto leave = [&st] {
    std::lock_guard<std::mutex> lock(st.mu);
    st.active_workers--;
    st.last_worker_seen = Clock::now();
    st.cv.notify_all();
  };

  while (true) {
    std::int64_t idx = -1;
    {
      std::unique_lock<std::mutex> lock(st.mu);
      st.cv.wait(lock, [&] {
        return st.all_done() || st.job_failed || st.shutting_down ||
               st.gate_open;
      });
      while (!st.all_done() && !st.job_failed && !st.shutting_down) {
        idx = st.acquire_task();
        if (idx >= 0) break;
        st.cv.wait_for(lock, std::chrono::milliseconds(100));
      }
      if (idx < 0) {
        // job finished (or failed): tell the worker to stand down
        lock.unlock();
        sock.send_line(wire::encode(wire::Done{}));
        leave();
        return;
      }
    }

    const TaskSpec& spec = st.manifest->tasks[static_cast<std::size_t>(idx)];
    wire::Task task;
    task.task_id = spec.task_id;
    task.variate = spec.variate_id;
    task.targets = spec.target_ids;
    task.candidates = spec.candidates;
    task.digest = st.digest;
    task.dtw = st.manifest->dtw;
    if (!sock.send_line(wire::encode(std::move(task)))) {
      {
        std::lock_guard<std::mutex> lock(st.mu);
        st.repend(idx);
      }
      leave();
      return;
    }

    const int wait_ms =
        static_cast<int>(st.opt.task_timeout_s * 1000.0) + 250;
    const auto reply = sock.recv_line(wait_ms);
    if (reply.status != net::Socket::RecvStatus::line) {
      {
        std::lock_guard<std::mutex> lock(st.mu);
        st.repend(idx);
      }
      leave();
      return;
    }
    const auto msg = wire::decode(reply.line);
    if (!msg) {  // malformed reply; task goes back, connection survives
      std::lock_guard<std::mutex> lock(st.mu);
      st.repend(idx);
      continue;
    }
    if (const auto* res = std::get_if<wire::Result>(&*msg)) {
      std::lock_guard<std::mutex> lock(st.mu);
      if (res->task_id != spec.task_id) {
        st.repend(idx);
        continue;
      }
      auto rows = rows_from_result(spec, *res);
      if (!rows) {
        st.repend(idx);
        continue;
      }
      st.complete(idx, std::move(*rows));
      st.last_worker_seen = Clock::now();
      continue;
    }
    if (const auto* nack = std::get_if<wire::Nack>(&*msg)) {
      {
        std::lock_guard<std::mutex> lock(st.mu);
        st.repend(idx);
      }
      if (nack->reason == "fingerprint_mismatch") {
        // every task this worker gets will mismatch; drop the connection
        leave();
        return;
      }
      continue;
    }
    // unexpected message kind: repend and keep the connection
    std::lock_guard<std::mutex> lock(st.mu);
    st.repend(idx);
  }
}

}  // namespace

std::vector<VariateDistanceBlock> run_distributed(const JobManifest& m,
                                                  const std::string& listen_addr,
                                                  const DistOptions& opt) {
  if (m.tasks.empty()) throw Error(Errc::empty_job, "no tasks to run");
  if (opt.min_workers < 1)
    throw Error(Errc::invalid_parameter, "min_workers must be >= 1");

  const auto [host, port] = net::parse_hostport(listen_addr);
  net::Listener listener = net::Listener::bind_listen(host, port);
  if (opt.on_listening) opt.on_listening(listener.port());

  CoordState st;
  st.manifest = &m;
  st.opt = opt;
  st.digest = wire::task_digest(m.cohort_fingerprint, m.dtw);
  st.state.assign(m.tasks.size(), TaskState::pending);
  st.attempts.assign(m.tasks.size(), 0);
  st.deadline.assign(m.tasks.size(), Clock::now());
  st.results.resize(m.tasks.size());

  const auto started = Clock::now();
  std::vector<std::thread> conns;
  std::mutex conns_mu;
  std::atomic<bool> accept_stop{false};

  std::thread acceptor([&] {
    while (!accept_stop.load()) {
      auto sock = listener.accept_one(100);
      if (!sock) continue;
      std::lock_guard<std::mutex> lock(conns_mu);
      conns.emplace_back(
          [&st, s = std::move(*sock)]() mutable { serve_worker(st, std::move(s)); });
    }
  });

  // open the dispatch gate once min_workers registered or the wait expires
  {
    std::unique_lock<std::mutex> lock(st.mu);
    st.cv.wait_for(
        lock,
        std::chrono::milliseconds(
            static_cast<long long>(opt.register_wait_s * 1000.0)),
        [&] { return st.gate_open || st.job_failed; });
    if (!st.gate_open) {
      if (st.registered_total == 0) {
        st.shutting_down = true;
        st.cv.notify_all();
        lock.unlock();
        accept_stop.store(true);
        acceptor.join();
        {
          std::lock_guard<std::mutex> g(conns_mu);
          for (auto& t : conns) t.join();
        }
        throw Error(Errc::no_workers_available,
                    "no worker registered within " +
                        std::to_string(opt.register_wait_s) + "s at " +
                        listen_addr);
      }
      st.gate_open = true;  // fewer than min_workers, but someone is here
      st.cv.notify_all();
    }
  }

  // wait for completion; fail when every worker is gone past the timeout
  {
    std::unique_lock<std::mutex> lock(st.mu);
    while (!st.all_done() && !st.job_failed) {
      st.cv.wait_for(lock, std::chrono::milliseconds(200));
      if (st.all_done() || st.job_failed) break;
      if (st.active_workers == 0) {
        const double idle = std::chrono::duration<double>(
                                Clock::now() - st.last_worker_seen)
                                .count();
        if (idle > opt.task_timeout_s && seconds_since(started) >
                                             opt.register_wait_s) {
          st.fail("all workers disconnected with tasks outstanding");
        }
      }
    }
    st.shutting_down = true;
    st.cv.notify_all();
  }

  accept_stop.store(true);
  acceptor.join();
  {
    std::lock_guard<std::mutex> lock(conns_mu);
    for (auto& t : conns) t.join();
  }

  if (st.job_failed)
    throw Error(Errc::job_incomplete, st.failure);
  return merge_results(m, st.results);
}

void worker_serve(const std::string& coordinator_addr, const Cohort& cohort,
                  const std::atomic<bool>* stop) {
  const auto [host, port] = net::parse_hostport(coordinator_addr);
  const std::string fingerprint = fingerprint_hex(cohort);
  char name[256];
  std::snprintf(name, sizeof name, "worker-%d", static_cast<int>(::getpid()));

  while (!(stop && stop->load())) {
    auto sock = net::Socket::connect_to(host, port);
    if (!sock) {
      std::this_thread::sleep_for(std::chrono::milliseconds(300));
      continue;
    }
    if (!sock->send_line(
            wire::encode(wire::Register{name, fingerprint}))) {
      continue;
    }
    while (true) {
      if (stop && stop->load()) return;
      const auto got = sock->recv_line(500);
      if (got.status == net::Socket::RecvStatus::timed_out) continue;
      if (got.status == net::Socket::RecvStatus::closed) break;
      const auto msg = wire::decode(got.line);
      if (!msg) {
        sock->send_line(
            wire::encode(wire::Nack{-1, "malformed_message"}));
        continue;
      }
      if (std::holds_alternative<wire::Done>(*msg)) break;
      const auto* task = std::get_if<wire::Task>(&*msg);
      if (!task) {
        sock->send_line(
            wire::encode(wire::Nack{-1, "unexpected_message"}));
        continue;
      }
      if (task->digest != wire::task_digest(fingerprint, task->dtw)) {
        sock->send_line(wire::encode(
            wire::Nack{task->task_id, "fingerprint_mismatch"}));
        continue;
      }
      wire::Result res;
      res.task_id = task->task_id;
      try {
        const VariateDistanceBlock block = compute_block_rows(
            cohort, task->variate, task->targets, task->candidates, task->dtw);
        for (std::size_t r = 0; r < block.target_ids.size(); ++r) {
          for (std::size_t c = 0; c < block.candidate_ids[r].size(); ++c) {
            wire::ResultRow row;
            row.target = block.target_ids[r];
            row.candidate = block.candidate_ids[r][c];
            const double d = block.distances[r][c];
            if (!std::isnan(d)) row.distance = d;
            res.rows.push_back(std::move(row));
          }
        }
      } catch (const Error& e) {
        sock->send_line(wire::encode(wire::Nack{task->task_id, e.what()}));
        continue;
      }
      if (!sock->send_line(wire::encode(std::move(res)))) break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(200));
  }
}

}  // namespace simfuse
