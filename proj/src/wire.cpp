#include "simfuse/wire.hpp"

#include "json.hpp"
#include "simfuse/hash.hpp"

namespace simfuse::wire {

using nlohmann::json;

std::string task_digest(const std::string& cohort_fingerprint,
                        const DtwConfig& cfg) {
  Fnv1a h;
  h.str(cohort_fingerprint);
  h.i64(cfg.band ? *cfg.band : -1);
  h.u64(cfg.final_sqrt ? 1 : 0);
  return h.hex();
}

std::string encode(const Message& msg) {
  json j;
  if (const auto* reg = std::get_if<Register>(&msg)) {
    j["t"] = "REGISTER";
    j["worker"] = reg->worker;
    j["fingerprint"] = reg->fingerprint;
  } else if (const auto* task = std::get_if<Task>(&msg)) {
    j["t"] = "TASK";
    j["task_id"] = task->task_id;
    j["variate"] = task->variate;
    j["targets"] = task->targets;
    j["candidates"] = task->candidates;
    j["digest"] = task->digest;
    j["dtw"]["band"] =
        task->dtw.band ? json(*task->dtw.band) : json(nullptr);
    j["dtw"]["final_sqrt"] = task->dtw.final_sqrt;
  } else if (const auto* res = std::get_if<Result>(&msg)) {
    j["t"] = "RESULT";
    j["task_id"] = res->task_id;
    auto& rows = j["rows"] = json::array();
    for (const auto& r : res->rows) {
      rows.push_back(json::array(
          {r.target, r.candidate,
           r.distance ? json(*r.distance) : json(nullptr)}));
    }
  } else if (const auto* nack = std::get_if<Nack>(&msg)) {
    j["t"] = "NACK";
    j["task_id"] = nack->task_id;
    j["reason"] = nack->reason;
  } else {
    j["t"] = "DONE";
  }
  return j.dump();
}

std::optional<Message> decode(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("t") ||
      !j["t"].is_string()) {
    return std::nullopt;
  }
  const std::string t = j["t"].get<std::string>();
  try {
    if (t == "REGISTER") {
      Register reg;
      reg.worker = j.at("worker").get<std::string>();
      reg.fingerprint = j.at("fingerprint").get<std::string>();
      return Message(std::move(reg));
    }
    if (t == "TASK") {
      Task task;
      task.task_id = j.at("task_id").get<std::int64_t>();
      task.variate = j.at("variate").get<std::string>();
      task.targets = j.at("targets").get<std::vector<std::string>>();
      task.candidates =
          j.at("candidates").get<std::vector<std::vector<std::string>>>();
      task.digest = j.at("digest").get<std::string>();
      const auto& dtw = j.at("dtw");
      if (!dtw.at("band").is_null())
        task.dtw.band = dtw.at("band").get<int>();
      task.dtw.final_sqrt = dtw.at("final_sqrt").get<bool>();
      if (task.candidates.size() != task.targets.size()) return std::nullopt;
      return Message(std::move(task));
    }
    if (t == "RESULT") {
      Result res;
      res.task_id = j.at("task_id").get<std::int64_t>();
      for (const auto& row : j.at("rows")) {
        if (!row.is_array() || row.size() != 3) return std::nullopt;
        ResultRow r;
        r.target = row[0].get<std::string>();
        r.candidate = row[1].get<std::string>();
        if (!row[2].is_null()) r.distance = row[2].get<double>();
        res.rows.push_back(std::move(r));
      }
      return Message(std::move(res));
    }
    if (t == "NACK") {
      Nack nack;
      nack.task_id = j.at("task_id").get<std::int64_t>();
      nack.reason = j.at("reason").get<std::string>();
      return Message(std::move(nack));
    }
    if (t == "DONE") return Message(Done{});
  } catch (const json::exception&) {
    return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace simfuse::wire
