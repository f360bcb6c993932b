#pragma once

#include <chrono>
#include <cstddef>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "confeval/chat_client.hpp"
#include "confeval/dataset.hpp"
#include "confeval/distribution.hpp"

namespace confeval {

/// Spaces request starts at least 1/rate seconds apart. Rate <= 0 never waits.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second);
  void acquire();

 private:
  std::mutex mu_;
  std::chrono::steady_clock::duration interval_{};
  std::chrono::steady_clock::time_point next_{};
};

/// What an unparseable or failed reply contributes to the PredictionSet.
enum class FailurePolicy {
  kZeroRow,  // all-zero row; scores as a full miss
  kExclude,  // event omitted from that endpoint's predictions
};

std::string to_string(FailurePolicy p);
FailurePolicy parse_failure_policy(std::string_view s);

struct BatchOptions {
  std::size_t workers = 10;
  std::filesystem::path checkpoint_path;
  FailurePolicy failure_policy = FailurePolicy::kZeroRow;
  ParseOptions parse;
  bool retry_failures = false;            // on resume, redo tasks whose record is a failure
  std::optional<std::size_t> task_limit;  // stop after this many new tasks (interruption)
};

struct TaskFailure {
  std::string event_id;
  std::string kind;
  std::string message;
};

struct EndpointResult {
  std::string model_id;
  PredictionSet predictions;  // dataset order; pending events are absent
  std::vector<TaskFailure> failures;
  std::size_t succeeded = 0;
  std::size_t pending = 0;
  std::optional<std::string> auth_error;  // endpoint disabled
  TokenUsage usage;                       // summed over recorded tasks
};

struct BatchResult {
  std::vector<EndpointResult> endpoints;
  std::size_t tasks_total = 0;
  std::size_t tasks_run = 0;      // tasks executed in this invocation
  std::size_t tasks_skipped = 0;  // already terminal in the checkpoint
  std::size_t checkpoint_malformed_lines = 0;
  bool interrupted = false;
  double wall_seconds = 0.0;
};

class AllEndpointsFailedError : public RuntimeFailure {
 public:
  using RuntimeFailure::RuntimeFailure;
};

/// Classifies every (event, endpoint) pair through a bounded worker pool,
/// appending each terminal result to the checkpoint before it counts as
/// done. Pairs already terminal in the checkpoint are not re-requested.
/// Throws RuntimeFailure for an unwritable checkpoint and
/// AllEndpointsFailedError when no endpoint produced a single parsed reply.
BatchResult run_batch(const Dataset& d, const std::vector<EndpointConfig>& endpoints,
                      const BatchOptions& options);

/// Ideal wall time of `tasks` fixed-latency requests spread over `workers`.
double projected_wall_seconds(std::size_t tasks, double latency_seconds, std::size_t workers);

}  // namespace confeval
