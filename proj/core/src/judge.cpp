#include "qe/judge.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>
#include <unordered_set>

#include "qe/error.hpp"
#include "text_util.hpp"

namespace qe {

namespace {

std::chrono::milliseconds backoff_delay(const JudgeConfig& config, unsigned attempt) {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  const double ceiling = std::min(static_cast<double>(config.retry_max_delay.count()),
                                  static_cast<double>(config.retry_base_delay.count()) * std::ldexp(1.0, attempt));
  if (ceiling <= 0) return std::chrono::milliseconds{0};
  std::uniform_real_distribution<double> jitter(0.0, ceiling);
  return std::chrono::milliseconds{static_cast<long long>(jitter(rng))};
}

class InFlightGuard {
 public:
  InFlightGuard(std::atomic<std::size_t>& in_flight, std::atomic<std::size_t>& peak) : in_flight_(in_flight) {
    const auto now = ++in_flight_;
    auto seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
  }
  ~InFlightGuard() { --in_flight_; }
  InFlightGuard(const InFlightGuard&) = delete;
  InFlightGuard& operator=(const InFlightGuard&) = delete;

 private:
  std::atomic<std::size_t>& in_flight_;
};

}  // namespace

std::string to_string(BackendKind kind) {
  switch (kind) {
    case BackendKind::Http: return "http";
    case BackendKind::Mock: return "mock";
    case BackendKind::CacheOnly: return "cache-only";
  }
  return "?";
}

BackendKind parse_backend_kind(std::string_view text) {
  for (auto k : {BackendKind::Http, BackendKind::Mock, BackendKind::CacheOnly}) {
    if (detail::iequals(text, to_string(k))) return k;
  }
  throw ConfigError("unknown backend \"" + std::string(text) + "\" (expected http, mock or cache-only)");
}

void JudgeConfig::validate() const {
  if (backend == BackendKind::Http && endpoint_url.empty()) {
    throw ConfigError("http backend requires an endpoint URL (--endpoint or QE_BACKEND_URL)");
  }
  if (max_new_tokens < 1) throw ConfigError("max_new_tokens must be at least 1");
  if (!std::isfinite(temperature) || temperature < 0) throw ConfigError("temperature must be >= 0");
  if (max_in_flight < 1) throw ConfigError("max_in_flight must be at least 1");
  if (request_timeout.count() <= 0) throw ConfigError("request timeout must be positive");
}

JudgeEnvironment JudgeEnvironment::from_process() {
  JudgeEnvironment env;
  if (const char* url = std::getenv("QE_BACKEND_URL"); url != nullptr && *url != '\0') env.backend_url = url;
  if (const char* model = std::getenv("QE_MODEL"); model != nullptr && *model != '\0') env.model = model;
  return env;
}

std::string request_hash(std::string_view prompt, std::string_view model_name, double temperature,
                         int max_new_tokens) {
  std::string canonical = "qe-request-v1\n";
  canonical += std::to_string(model_name.size());
  canonical += ':';
  canonical += model_name;
  canonical += '\n';
  canonical += detail::shortest_decimal(temperature);
  canonical += '\n';
  canonical += std::to_string(max_new_tokens);
  canonical += '\n';
  canonical += prompt;
  return detail::sha256_hex(canonical);
}

void MockBackend::script(std::string hash, std::string text) {
  std::lock_guard lock(mutex_);
  texts_[std::move(hash)] = std::move(text);
}

void MockBackend::script_failure(std::string hash, int http_status) {
  std::lock_guard lock(mutex_);
  failures_[std::move(hash)] = http_status;
}

void MockBackend::script_delay(std::string hash, std::chrono::milliseconds delay) {
  std::lock_guard lock(mutex_);
  delays_[std::move(hash)] = delay;
}

std::string MockBackend::complete(const CompletionRequest& request) {
  ++calls_;
  InFlightGuard guard(in_flight_, peak_in_flight_);

  std::optional<std::chrono::milliseconds> delay;
  std::optional<int> failure;
  std::optional<std::string> text;
  {
    std::lock_guard lock(mutex_);
    if (auto it = delays_.find(request.hash); it != delays_.end()) delay = it->second;
    if (auto it = failures_.find(request.hash); it != failures_.end()) failure = it->second;
    if (auto it = texts_.find(request.hash); it != texts_.end()) text = it->second;
  }
  if (delay) std::this_thread::sleep_for(*delay);
  if (failure) {
    if (*failure == 0) throw TransportError("mock transport failure");
    throw BackendError(*failure, "mock backend failure");
  }
  if (text) return *text;
  if (responder_) return responder_(request);
  throw CacheMissError("mock backend has no script for request " + request.hash.substr(0, 12));
}

std::shared_ptr<MockBackend> gold_echo_mock(const DatasetSplit& split, const Rubric& rubric, AnswerSchema schema) {
  if (auto missing = split.missing_gold_ids(); !missing.empty()) {
    throw InvalidArgument("gold-echo mock needs gold scores; item \"" + missing.front() + "\" has none");
  }
  constexpr std::size_t kKeyLength = 32;

  struct Entry {
    std::string source;
    std::string hypothesis;
    std::string answer;
  };
  auto entries = std::make_shared<std::vector<Entry>>();
  // Index by the hypothesis tail: catalog templates end the user turn with the summary.
  auto by_tail = std::make_shared<std::unordered_multimap<std::string, std::size_t>>();
  auto tail_lengths = std::make_shared<std::vector<std::size_t>>();
  std::unordered_set<std::size_t> lengths;
  for (const auto& item : split.items()) {
    const std::size_t index = entries->size();
    entries->push_back({item.source_text, item.hypothesis,
                        format_answer(rubric, schema, rubric.snap(*item.gold_score))});
    const std::size_t len = std::min(kKeyLength, item.hypothesis.size());
    by_tail->emplace(item.hypothesis.substr(item.hypothesis.size() - len), index);
    lengths.insert(len);
  }
  tail_lengths->assign(lengths.begin(), lengths.end());

  return std::make_shared<MockBackend>([entries, by_tail, tail_lengths](const CompletionRequest& request) {
    std::string_view prompt = request.prompt;
    constexpr std::string_view kUser = "### User:\n";
    constexpr std::string_view kAssistant = "\n### Assistant:\n";
    if (auto pos = prompt.rfind(kUser); pos != std::string_view::npos) prompt.remove_prefix(pos + kUser.size());
    if (auto pos = prompt.rfind(kAssistant); pos != std::string_view::npos) prompt = prompt.substr(0, pos);

    auto contains = [&](const Entry& e) {
      return prompt.find(e.source) != std::string_view::npos && prompt.find(e.hypothesis) != std::string_view::npos;
    };
    const Entry* best = nullptr;
    auto consider = [&](const Entry& e) {
      if (best != nullptr && e.source.size() + e.hypothesis.size() <= best->source.size() + best->hypothesis.size()) {
        return;
      }
      if (contains(e)) best = &e;
    };
    for (std::size_t len : *tail_lengths) {
      if (len > prompt.size()) continue;
      auto [lo, hi] = by_tail->equal_range(std::string(prompt.substr(prompt.size() - len)));
      for (auto it = lo; it != hi; ++it) consider((*entries)[it->second]);
    }
    if (best == nullptr) {
      for (const auto& e : *entries) consider(e);
    }
    if (best == nullptr) throw CacheMissError("gold-echo mock: prompt matches no item in the split");
    return best->answer;
  });
}

Judge::Judge(JudgeConfig config, std::shared_ptr<CompletionBackend> backend, std::shared_ptr<ResponseCache> cache)
    : config_(std::move(config)),
      backend_(std::move(backend)),
      cache_(std::move(cache)),
      sleeper_([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }) {
  config_.validate();
  if (!backend_ && config_.backend != BackendKind::CacheOnly) {
    throw ConfigError("a " + to_string(config_.backend) + " judge needs a backend");
  }
}

std::string Judge::call_with_retries(const CompletionRequest& request) {
  for (unsigned attempt = 0;; ++attempt) {
    try {
      return backend_->complete(request);
    } catch (const TransportError& e) {
      if (attempt >= config_.max_retries) {
        throw TransportError(std::string(e.what()) + " (after " + std::to_string(attempt + 1) + " attempts)");
      }
    } catch (const BackendError& e) {
      if (e.status() < 500 || attempt >= config_.max_retries) throw;
    }
    sleeper_(backoff_delay(config_, attempt));
  }
}

JudgeResponse Judge::complete(std::string_view prompt) {
  if (prompt.empty()) throw InvalidArgument("prompt is empty");
  const auto start = std::chrono::steady_clock::now();

  CompletionRequest request{std::string(prompt), config_.model_name, config_.temperature, config_.max_new_tokens,
                            request_hash(prompt, config_.model_name, config_.temperature, config_.max_new_tokens)};
  JudgeResponse response;
  response.request_hash = request.hash;

  if (cache_) {
    if (auto hit = cache_->lookup(request.hash)) {
      response.text = std::move(*hit);
      response.from_cache = true;
      return response;
    }
  }
  if (config_.backend == BackendKind::CacheOnly || !backend_) {
    throw CacheMissError("no cached completion for request " + request.hash.substr(0, 12));
  }

  response.text = call_with_retries(request);
  if (cache_) cache_->store(request.hash, response.text, config_.model_name);
  response.latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start);
  return response;
}

std::vector<JudgeOutcome> Judge::complete_batch(std::span<const std::string> prompts) {
  std::vector<std::optional<JudgeOutcome>> slots(prompts.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < prompts.size(); i = next++) {
      try {
        slots[i].emplace(complete(prompts[i]));
      } catch (const BackendError& e) {
        slots[i].emplace(JudgeFailure{JudgeErrorKind::Backend, e.what(), e.status()});
      } catch (const TransportError& e) {
        slots[i].emplace(JudgeFailure{JudgeErrorKind::Transport, e.what(), 0});
      } catch (const CacheMissError& e) {
        slots[i].emplace(JudgeFailure{JudgeErrorKind::CacheMiss, e.what(), 0});
      } catch (const std::exception& e) {
        slots[i].emplace(JudgeFailure{JudgeErrorKind::InvalidRequest, e.what(), 0});
      }
    }
  };

  const std::size_t workers = std::min<std::size_t>(config_.max_in_flight, prompts.size());
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<JudgeOutcome> out;
  out.reserve(prompts.size());
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

std::shared_ptr<CompletionBackend> make_backend(const JudgeConfig& config) {
  switch (config.backend) {
    case BackendKind::Http: return std::make_shared<HttpBackend>(config.endpoint_url, config.request_timeout);
    case BackendKind::CacheOnly: return nullptr;
    case BackendKind::Mock: break;
  }
  throw ConfigError("mock backends must be constructed explicitly");
}

}  // namespace qe
