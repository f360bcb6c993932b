#include "confeval/batch_runner.hpp"

#include <atomic>
#include <cmath>
#include <memory>
#include <set>
#include <thread>

#include "confeval/checkpoint.hpp"
#include "confeval/prompt.hpp"

namespace confeval {

RateLimiter::RateLimiter(double requests_per_second) {
  if (requests_per_second > 0) {
    interval_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / requests_per_second));
  }
}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mu_);
    slot = std::max(std::chrono::steady_clock::now(), next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

std::string to_string(FailurePolicy p) { return p == FailurePolicy::kExclude ? "exclude" : "zero"; }

FailurePolicy parse_failure_policy(std::string_view s) {
  if (s == "zero") return FailurePolicy::kZeroRow;
  if (s == "exclude") return FailurePolicy::kExclude;
  throw InputError("unknown failure policy '" + std::string(s) + "' (expected zero|exclude)");
}

double projected_wall_seconds(std::size_t tasks, double latency_seconds, std::size_t workers) {
  if (workers == 0) throw std::invalid_argument("workers must be >= 1");
  return static_cast<double>(tasks) * latency_seconds / static_cast<double>(workers);
}

namespace {

struct Task {
  std::size_t endpoint;
  std::size_t event;
};

CheckpointRecord execute(const EndpointConfig& ep, RateLimiter& limiter, const EventRecord& ev,
                         const ParseOptions& parse) {
  CheckpointRecord r;
  r.event_id = ev.id;
  r.model_id = ep.model_id;
  const auto messages = build_messages(ev.text);
  try {
    const auto resp = send_request(ep, messages, [&] { limiter.acquire(); });
    r.raw_response = resp.content;
    r.attempts = resp.attempts;
    r.usage = resp.usage;
    try {
      r.probs = parse_distribution(resp.content, parse).probs;
    } catch (const DistributionError& e) {
      r.error_kind = to_string(e.kind());
      r.error_message = e.what();
    }
  } catch (const AuthError&) {
    throw;
  } catch (const RetriesExhaustedError& e) {
    r.error_kind = "retries_exhausted";
    r.error_message = e.what();
    r.attempts = e.attempts();
  } catch (const MalformedResponseError& e) {
    r.error_kind = "malformed_response";
    r.error_message = e.what();
    r.attempts = e.attempts();
  } catch (const HttpStatusError& e) {
    r.error_kind = "http_status";
    r.error_message = e.what();
    r.attempts = e.attempts();
  }
  r.timestamp = utc_timestamp();
  return r;
}

}  // namespace

BatchResult run_batch(const Dataset& d, const std::vector<EndpointConfig>& endpoints,
                      const BatchOptions& options) {
  if (options.workers == 0) throw InputError("workers must be >= 1");
  if (endpoints.empty()) throw InputError("no endpoints configured");
  if (options.checkpoint_path.empty()) throw InputError("a checkpoint path is required");
  {
    std::set<std::string> ids;
    for (const auto& ep : endpoints) {
      if (ep.model_id.empty()) throw InputError("endpoint without a model id");
      if (!ids.insert(ep.model_id).second) {
        throw InputError("endpoint model id '" + ep.model_id + "' listed twice");
      }
    }
  }
  const auto started = std::chrono::steady_clock::now();

  const auto log = read_checkpoint(options.checkpoint_path);
  auto state = replay(log);
  CheckpointWriter writer(options.checkpoint_path);

  BatchResult result;
  result.checkpoint_malformed_lines = log.malformed_lines.size();
  result.tasks_total = d.size() * endpoints.size();

  std::vector<Task> todo;
  for (std::size_t e = 0; e < endpoints.size(); ++e) {
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto it = state.find({endpoints[e].model_id, d[i].id});
      const bool terminal = it != state.end() && (it->second.ok() || !options.retry_failures);
      if (terminal) {
        ++result.tasks_skipped;
      } else {
        todo.push_back({e, i});
      }
    }
  }
  std::size_t runnable = todo.size();
  if (options.task_limit && *options.task_limit < runnable) {
    runnable = *options.task_limit;
    result.interrupted = true;
  }

  std::vector<std::unique_ptr<RateLimiter>> limiters;
  for (const auto& ep : endpoints) limiters.push_back(std::make_unique<RateLimiter>(ep.rate_limit));
  std::vector<std::optional<std::string>> auth_errors(endpoints.size());
  std::unique_ptr<std::atomic<bool>[]> disabled(new std::atomic<bool>[endpoints.size()]);
  for (std::size_t e = 0; e < endpoints.size(); ++e) disabled[e] = false;

  std::mutex results_mu;
  std::vector<CheckpointRecord> fresh;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> ran{0};
  std::exception_ptr fatal;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= runnable) return;
      const Task t = todo[k];
      if (disabled[t.endpoint]) continue;
      try {
        auto rec = execute(endpoints[t.endpoint], *limiters[t.endpoint], d[t.event], options.parse);
        writer.append(rec);
        ran.fetch_add(1);
        std::lock_guard lock(results_mu);
        fresh.push_back(std::move(rec));
      } catch (const AuthError& e) {
        disabled[t.endpoint] = true;
        std::lock_guard lock(results_mu);
        if (!auth_errors[t.endpoint]) auth_errors[t.endpoint] = e.what();
      } catch (...) {
        std::lock_guard lock(results_mu);
        if (!fatal) fatal = std::current_exception();
        next.store(runnable);
      }
    }
  };
  const std::size_t n_threads = std::min(options.workers, std::max<std::size_t>(runnable, 1));
  std::vector<std::thread> pool;
  pool.reserve(n_threads);
  for (std::size_t w = 0; w < n_threads; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (fatal) std::rethrow_exception(fatal);

  for (auto& rec : fresh) state[{rec.model_id, rec.event_id}] = std::move(rec);
  result.tasks_run = ran.load();

  bool any_success = false;
  for (std::size_t e = 0; e < endpoints.size(); ++e) {
    EndpointResult er;
    er.model_id = endpoints[e].model_id;
    er.auth_error = auth_errors[e];
    er.predictions.model_name = er.model_id;
    std::vector<std::array<double, kNumLabels>> rows;
    for (std::size_t i = 0; i < d.size(); ++i) {
      const auto it = state.find({er.model_id, d[i].id});
      if (it == state.end()) {
        ++er.pending;
        continue;
      }
      const auto& rec = it->second;
      er.usage.input += rec.usage.input;
      er.usage.output += rec.usage.output;
      if (rec.ok()) {
        ++er.succeeded;
        rows.push_back(*rec.probs);
      } else {
        er.failures.push_back({rec.event_id, rec.error_kind, rec.error_message});
        if (options.failure_policy == FailurePolicy::kExclude) continue;
        rows.push_back({});
      }
      er.predictions.ids.push_back(d[i].id);
    }
    er.predictions.probs.resize(static_cast<Eigen::Index>(rows.size()), kNumLabels);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t k = 0; k < kNumLabels; ++k) {
        er.predictions.probs(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(k)) = rows[r][k];
      }
    }
    any_success = any_success || er.succeeded > 0;
    result.endpoints.push_back(std::move(er));
  }
  result.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const bool finished = !result.interrupted;
  if (!any_success && d.size() > 0 && (finished || result.tasks_run > 0)) {
    std::string why;
    for (const auto& er : result.endpoints) {
      why += "\n  " + er.model_id + ": " +
             (er.auth_error ? *er.auth_error
                            : std::to_string(er.failures.size()) + " failed task(s)");
    }
    throw AllEndpointsFailedError("no endpoint produced a parseable reply:" + why);
  }
  return result;
}

}  // namespace confeval
