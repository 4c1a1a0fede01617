#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "qe/corpus.hpp"
#include "qe/prompting.hpp"

namespace qe {

enum class BackendKind { Http, Mock, CacheOnly };

std::string to_string(BackendKind kind);
BackendKind parse_backend_kind(std::string_view text);

struct JudgeConfig {
  BackendKind backend = BackendKind::Mock;
  std::string endpoint_url;
  std::string model_name = "orca_mini_v3_7b";
  double temperature = 0.0;
  int max_new_tokens = 512;
  std::chrono::milliseconds request_timeout{120'000};
  unsigned max_retries = 3;
  unsigned max_in_flight = 4;
  /// Backoff ceiling for the first retry; doubles per attempt, capped at retry_max_delay.
  std::chrono::milliseconds retry_base_delay{250};
  std::chrono::milliseconds retry_max_delay{10'000};

  /// Throws ConfigError on invalid settings.
  void validate() const;
};

/// Environment overrides for fields not set explicitly: QE_BACKEND_URL, QE_MODEL.
struct JudgeEnvironment {
  std::optional<std::string> backend_url;
  std::optional<std::string> model;

  static JudgeEnvironment from_process();
};

/// Content hash (hex SHA-256) over prompt and decoding parameters.
std::string request_hash(std::string_view prompt, std::string_view model_name, double temperature,
                         int max_new_tokens);

struct CompletionRequest {
  std::string prompt;
  std::string model_name;
  double temperature = 0.0;
  int max_new_tokens = 512;
  std::string hash;
};

struct JudgeResponse {
  std::string request_hash;
  std::string text;
  std::chrono::milliseconds latency{0};
  bool from_cache = false;
};

/// A source of completions. Implementations must be safe to call concurrently.
class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  /// Throws TransportError, BackendError or CacheMissError.
  virtual std::string complete(const CompletionRequest& request) = 0;
};

/// Completion-style JSON POST {model, prompt, temperature, max_tokens} -> {text}.
class HttpBackend final : public CompletionBackend {
 public:
  HttpBackend(std::string endpoint_url, std::chrono::milliseconds timeout);

  std::string complete(const CompletionRequest& request) override;

 private:
  std::string scheme_host_port_;
  std::string path_;
  std::chrono::milliseconds timeout_;
};

/// Scripted in-process backend with call and concurrency instrumentation.
class MockBackend final : public CompletionBackend {
 public:
  using Responder = std::function<std::string(const CompletionRequest&)>;

  MockBackend() = default;
  explicit MockBackend(Responder responder) : responder_(std::move(responder)) {}

  /// Responds with `text` to the request whose hash is `hash`.
  void script(std::string hash, std::string text);
  /// Fails the request with an HTTP status (0 means a transport failure).
  void script_failure(std::string hash, int http_status = 0);
  /// Delays the response for `hash`.
  void script_delay(std::string hash, std::chrono::milliseconds delay);

  std::string complete(const CompletionRequest& request) override;

  std::size_t calls() const noexcept { return calls_.load(); }
  std::size_t peak_in_flight() const noexcept { return peak_in_flight_.load(); }

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> texts_;
  std::unordered_map<std::string, int> failures_;
  std::unordered_map<std::string, std::chrono::milliseconds> delays_;
  Responder responder_;
  std::atomic<std::size_t> calls_{0};
  std::atomic<std::size_t> in_flight_{0};
  std::atomic<std::size_t> peak_in_flight_{0};
};

/// Mock that answers the rendered prompt of each split item with a well-formed
/// answer encoding its gold score snapped to `rubric`. The target item is the
/// one whose source and hypothesis both appear in the final user turn.
std::shared_ptr<MockBackend> gold_echo_mock(const DatasetSplit& split, const Rubric& rubric,
                                            AnswerSchema schema);

/// Request-hash keyed completion cache, optionally persisted as an
/// append-only JSON-Lines file of {request_hash, text, model_name, timestamp}.
class ResponseCache {
 public:
  ResponseCache() = default;
  /// Loads existing entries from `path` (if present) and appends new ones to it.
  explicit ResponseCache(std::filesystem::path path);

  std::optional<std::string> lookup(const std::string& hash) const;
  void store(const std::string& hash, const std::string& text, const std::string& model_name);

  std::size_t size() const;
  /// Lines in the backing file that could not be parsed and were skipped.
  std::size_t skipped_lines() const noexcept { return skipped_lines_; }
  const std::optional<std::filesystem::path>& path() const noexcept { return path_; }

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, std::string> entries_;
  std::optional<std::filesystem::path> path_;
  std::size_t skipped_lines_ = 0;
};

enum class JudgeErrorKind { Transport, Backend, CacheMiss, InvalidRequest };

struct JudgeFailure {
  JudgeErrorKind kind = JudgeErrorKind::Transport;
  std::string message;
  int http_status = 0;
};

/// Result of one batch entry: a response or the error that item hit.
class JudgeOutcome {
 public:
  JudgeOutcome(JudgeResponse response) : value_(std::move(response)) {}
  JudgeOutcome(JudgeFailure failure) : value_(std::move(failure)) {}

  bool ok() const noexcept { return std::holds_alternative<JudgeResponse>(value_); }
  const JudgeResponse& response() const { return std::get<JudgeResponse>(value_); }
  const JudgeFailure& failure() const { return std::get<JudgeFailure>(value_); }

 private:
  std::variant<JudgeResponse, JudgeFailure> value_;
};

/// The inference boundary: caching, retries with jittered exponential
/// backoff, and bounded-concurrency batches over a CompletionBackend.
class Judge {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  /// `backend` may be null only for BackendKind::CacheOnly; `cache` may be null.
  Judge(JudgeConfig config, std::shared_ptr<CompletionBackend> backend,
        std::shared_ptr<ResponseCache> cache = nullptr);

  const JudgeConfig& config() const noexcept { return config_; }

  JudgeResponse complete(std::string_view prompt);

  /// Results align index-for-index with `prompts`; at most max_in_flight
  /// requests are outstanding at once.
  std::vector<JudgeOutcome> complete_batch(std::span<const std::string> prompts);

  /// Replaces the sleep used between retries (tests).
  void set_sleeper(Sleeper sleeper) { sleeper_ = std::move(sleeper); }

 private:
  std::string call_with_retries(const CompletionRequest& request);

  JudgeConfig config_;
  std::shared_ptr<CompletionBackend> backend_;
  std::shared_ptr<ResponseCache> cache_;
  Sleeper sleeper_;
};

/// Backend for Http configs; null for CacheOnly. Mock configs need an explicit
/// MockBackend and throw ConfigError here.
std::shared_ptr<CompletionBackend> make_backend(const JudgeConfig& config);

}  // namespace qe
