#include "confeval/checkpoint.hpp"

#include <chrono>
#include <ctime>

#include <json.hpp>

#include "confeval/errors.hpp"

namespace confeval {

using nlohmann::json;

std::string record_to_json(const CheckpointRecord& r) {
  json j = {{"event_id", r.event_id},
            {"model_id", r.model_id},
            {"raw_response", r.raw_response},
            {"attempts", r.attempts},
            {"timestamp", r.timestamp},
            {"usage", {{"input", r.usage.input}, {"output", r.usage.output}}}};
  if (r.probs) {
    j["probs"] = *r.probs;
  } else {
    j["error"] = {{"kind", r.error_kind}, {"message", r.error_message}};
  }
  // Replies may carry invalid UTF-8; replace rather than fail the run.
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

CheckpointRecord record_from_json(const std::string& line) {
  const json j = json::parse(line, nullptr, false);
  if (!j.is_object()) throw InputError("checkpoint line is not a JSON object");
  try {
    CheckpointRecord r;
    r.event_id = j.at("event_id").get<std::string>();
    r.model_id = j.at("model_id").get<std::string>();
    r.raw_response = j.value("raw_response", "");
    r.attempts = j.value("attempts", 0);
    r.timestamp = j.value("timestamp", "");
    if (j.contains("usage")) {
      r.usage.input = j["usage"].value("input", std::int64_t{0});
      r.usage.output = j["usage"].value("output", std::int64_t{0});
    }
    if (j.contains("probs")) {
      const auto& p = j["probs"];
      if (!p.is_array() || p.size() != kNumLabels) throw InputError("probs must have 9 entries");
      std::array<double, kNumLabels> probs{};
      for (std::size_t k = 0; k < kNumLabels; ++k) probs[k] = p[k].get<double>();
      r.probs = probs;
    } else if (j.contains("error")) {
      r.error_kind = j["error"].value("kind", "unknown");
      r.error_message = j["error"].value("message", "");
    } else {
      throw InputError("record has neither probs nor error");
    }
    return r;
  } catch (const json::exception& e) {
    throw InputError(std::string("bad checkpoint record: ") + e.what());
  }
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

CheckpointWriter::CheckpointWriter(const std::filesystem::path& path) {
  bool needs_newline = false;
  {
    std::ifstream existing(path, std::ios::binary);
    if (existing) {
      existing.seekg(0, std::ios::end);
      if (existing.tellg() > 0) {
        existing.seekg(-1, std::ios::end);
        needs_newline = existing.get() != '\n';
      }
    }
  }
  out_.open(path, std::ios::app | std::ios::binary);
  if (!out_) throw RuntimeFailure("cannot open checkpoint for appending: " + path.string());
  if (needs_newline) out_ << '\n' << std::flush;
}

void CheckpointWriter::append(const CheckpointRecord& r) {
  const std::string line = record_to_json(r);
  std::lock_guard lock(mu_);
  out_ << line << '\n' << std::flush;
  if (!out_) throw RuntimeFailure("checkpoint write failed");
}

CheckpointLog read_checkpoint(const std::filesystem::path& path) {
  CheckpointLog log;
  std::ifstream in(path, std::ios::binary);
  if (!in) return log;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      log.records.push_back(record_from_json(line));
    } catch (const InputError&) {
      log.malformed_lines.push_back(n);
    }
  }
  return log;
}

std::map<TaskKey, CheckpointRecord> replay(const CheckpointLog& log) {
  std::map<TaskKey, CheckpointRecord> state;
  for (const auto& r : log.records) state[{r.model_id, r.event_id}] = r;
  return state;
}

}  // namespace confeval
