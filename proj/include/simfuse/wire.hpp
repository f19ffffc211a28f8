#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "simfuse/dtw.hpp"

namespace simfuse::wire {

// Line-delimited JSON messages.  "t" discriminates the kind:
//   {"t":"REGISTER","worker":W,"fingerprint":F}
//   {"t":"TASK","task_id":N,"variate":V,"targets":[..],"candidates":[[..],..],
//    "digest":D,"dtw":{"band":null|B,"final_sqrt":true}}
//   {"t":"RESULT","task_id":N,"rows":[[target,candidate,distance|null],..]}
//   {"t":"NACK","task_id":N,"reason":R}
//   {"t":"DONE"}

struct Register {
  std::string worker;
  std::string fingerprint;
};

struct Task {
  std::int64_t task_id = 0;
  std::string variate;
  std::vector<std::string> targets;
  std::vector<std::vector<std::string>> candidates;  // parallel to targets
  std::string digest;
  DtwConfig dtw;
};

struct ResultRow {
  std::string target;
  std::string candidate;
  std::optional<double> distance;  // nullopt = missing pairing
};

struct Result {
  std::int64_t task_id = 0;
  std::vector<ResultRow> rows;
};

struct Nack {
  std::int64_t task_id = 0;
  std::string reason;
};

struct Done {};

using Message = std::variant<Register, Task, Result, Nack, Done>;

std::string encode(const Message& msg);
// nullopt for malformed or unknown messages
std::optional<Message> decode(const std::string& line);

// Task digest: FNV-1a over the cohort fingerprint and the DTW config.
std::string task_digest(const std::string& cohort_fingerprint,
                        const DtwConfig& cfg);

}  // namespace simfuse::wire
