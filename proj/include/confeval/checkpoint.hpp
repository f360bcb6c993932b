#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "confeval/chat_client.hpp"
#include "confeval/labels.hpp"

namespace confeval {

/// Terminal outcome of one (event, endpoint) task.
struct CheckpointRecord {
  std::string event_id;
  std::string model_id;
  std::string raw_response;
  std::optional<std::array<double, kNumLabels>> probs;  // set on success
  std::string error_kind;                               // set on failure
  std::string error_message;
  int attempts = 0;
  std::string timestamp;  // ISO-8601 UTC
  TokenUsage usage;

  bool ok() const { return probs.has_value(); }
};

std::string record_to_json(const CheckpointRecord& r);

/// Throws InputError when the line is not a well-formed record.
CheckpointRecord record_from_json(const std::string& line);

std::string utc_timestamp();

/// Append-only JSONL writer shared by all workers. Each record is flushed
/// before append() returns.
class CheckpointWriter {
 public:
  /// Throws RuntimeFailure when the path cannot be opened for appending.
  explicit CheckpointWriter(const std::filesystem::path& path);

  void append(const CheckpointRecord& r);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

struct CheckpointLog {
  std::vector<CheckpointRecord> records;
  std::vector<std::size_t> malformed_lines;  // 1-based; e.g. a torn final write
};

/// Missing file reads as an empty log.
CheckpointLog read_checkpoint(const std::filesystem::path& path);

using TaskKey = std::pair<std::string, std::string>;  // (model_id, event_id)

/// Last record wins per (model, event).
std::map<TaskKey, CheckpointRecord> replay(const CheckpointLog& log);

}  // namespace confeval
