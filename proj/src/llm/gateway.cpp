#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <json.hpp>

#include "assaygen/errors.hpp"
#include "assaygen/llm.hpp"
#include "assaygen/util.hpp"
#include "llm_internal.hpp"

namespace assaygen::llm {

namespace {

void validate(const ProviderConfig& config) {
  if (config.max_retries < 0 || config.max_retries > 8) {
    throw ConfigError("max_retries", "must be in [0, 8]");
  }
  if (config.provider != "mock" && config.provider != "http") {
    throw ConfigError("provider", "unknown provider '" + config.provider + "'");
  }
  if (config.provider == "http" && config.base_url.empty()) {
    throw ConfigError("base_url", "required for the http provider");
  }
  if (config.request_timeout <= 0) {
    throw ConfigError("request_timeout", "must be positive");
  }
  if (config.rate_per_second < 0) {
    throw ConfigError("rate_per_second", "must be non-negative");
  }
  if (config.mock_dim <= 0) {
    throw ConfigError("mock_dim", "must be positive");
  }
}

// Resolves the API key, or throws AuthError before any network activity.
// An empty api_key_env means the endpoint needs no key.
std::string resolve_key(const ProviderConfig& config) {
  if (config.api_key_env.empty()) return {};
  const char* value = std::getenv(config.api_key_env.c_str());
  if (value == nullptr || *value == '\0') {
    throw AuthError("environment variable " + config.api_key_env +
                    " is not set");
  }
  return value;
}

bool retryable(const Error& e) {
  if (e.kind() == "RateLimited" || e.kind() == "Timeout") return true;
  if (e.kind() == "ProviderError") {
    const auto* pe = dynamic_cast<const ProviderError*>(&e);
    return pe != nullptr && (pe->status() >= 500 || pe->status() == 0);
  }
  return false;
}

int backoff_ms(const ProviderConfig& config, int retry_index) {
  long long ms = config.backoff_initial_ms;
  for (int i = 0; i < retry_index && ms < 4000; ++i) ms *= 2;
  return static_cast<int>(std::min<long long>(ms, 4000));
}

}  // namespace

class Gateway::InFlightGuard {
 public:
  explicit InFlightGuard(Gateway& g) : gateway_(g) { gateway_.acquire_slot(); }
  ~InFlightGuard() { gateway_.release_slot(); }
  InFlightGuard(const InFlightGuard&) = delete;
  InFlightGuard& operator=(const InFlightGuard&) = delete;

 private:
  Gateway& gateway_;
};

Gateway::Gateway(std::uint64_t seed, std::string call_log_path)
    : seed_(seed), call_log_path_(std::move(call_log_path)) {}

void Gateway::set_max_in_flight(int n) {
  if (n < 1) throw ConfigError("max_in_flight", "must be at least 1");
  {
    std::lock_guard<std::mutex> lock(slots_mutex_);
    slot_limit_ = n;
  }
  slots_cv_.notify_all();
}

void Gateway::acquire_slot() {
  std::unique_lock<std::mutex> lock(slots_mutex_);
  slots_cv_.wait(lock, [this] { return slots_in_use_ < slot_limit_; });
  ++slots_in_use_;
}

void Gateway::release_slot() {
  {
    std::lock_guard<std::mutex> lock(slots_mutex_);
    --slots_in_use_;
  }
  slots_cv_.notify_one();
}

void Gateway::pace(const ProviderConfig& config) {
  if (config.rate_per_second <= 0) return;
  const std::string key = config.provider + "|" + config.base_url + "|" +
                          config.model_id;
  for (;;) {
    std::chrono::steady_clock::duration wait{};
    {
      std::lock_guard<std::mutex> lock(buckets_mutex_);
      Bucket& bucket = buckets_[key];
      auto now = std::chrono::steady_clock::now();
      if (!bucket.primed) {
        bucket.primed = true;
        bucket.tokens = 1.0;
        bucket.last = now;
      } else {
        double elapsed = std::chrono::duration<double>(now - bucket.last)
                             .count();
        bucket.tokens = std::min(1.0, bucket.tokens +
                                          elapsed * config.rate_per_second);
        bucket.last = now;
      }
      if (bucket.tokens >= 1.0) {
        bucket.tokens -= 1.0;
        return;
      }
      wait = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>((1.0 - bucket.tokens) /
                                        config.rate_per_second));
    }
    std::this_thread::sleep_for(wait);
  }
}

void Gateway::log_call(const CallRecord& record) {
  {
    std::lock_guard<std::mutex> lock(state_mutex_);
    last_call_ = record;
  }
  if (call_log_path_.empty()) return;
  nlohmann::ordered_json line;
  line["kind"] = record.kind;
  line["provider"] = record.provider;
  line["model"] = record.model;
  line["prompt_hash"] = to_hex(record.prompt_hash);
  line["retries"] = record.retries;
  line["ok"] = record.ok;
  line["error"] = record.error_kind;
  line["response_chars"] = record.response_chars;
  std::string text = line.dump();
  text.push_back('\n');
  std::lock_guard<std::mutex> lock(state_mutex_);
  std::FILE* f = std::fopen(call_log_path_.c_str(), "ab");
  if (f == nullptr) {
    throw ConfigError("call_log_path", "cannot open " + call_log_path_);
  }
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
}

CallRecord Gateway::last_call() const {
  std::lock_guard<std::mutex> lock(state_mutex_);
  return last_call_;
}

std::string Gateway::chat(const ChatRequest& request,
                          const ProviderConfig& config) {
  validate(config);
  if (request.prompt.empty()) {
    throw ConfigError("prompt", "must be non-empty");
  }
  if (request.temperature < 0) {
    throw ConfigError("temperature", "must be non-negative");
  }
  if (request.max_output_tokens <= 0) {
    throw ConfigError("max_output_tokens", "must be positive");
  }

  CallRecord record;
  record.kind = "chat";
  record.provider = config.provider;
  record.model = request.model_id.empty() ? config.model_id : request.model_id;
  record.prompt_hash = fnv1a64(request.prompt);

  InFlightGuard guard(*this);
  if (config.provider == "mock") {
    pace(config);
    std::string reply = detail::mock_chat(seed_, request, config);
    record.ok = true;
    record.response_chars = reply.size();
    log_call(record);
    return reply;
  }

  const std::string key = resolve_key(config);
  for (int attempt = 0;; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(backoff_ms(config, attempt - 1)));
    }
    pace(config);
    try {
      std::string reply = detail::http_chat_once(request, config, key);
      record.ok = true;
      record.retries = attempt;
      record.response_chars = reply.size();
      log_call(record);
      return reply;
    } catch (const Error& e) {
      if (retryable(e) && attempt < config.max_retries) continue;
      record.ok = false;
      record.retries = attempt;
      record.error_kind = e.kind();
      log_call(record);
      throw;
    }
  }
}

embedding::EmbeddingVector Gateway::embed_text(const std::string& text,
                                               const ProviderConfig& config) {
  validate(config);
  if (text.empty()) throw ConfigError("text", "must be non-empty");

  CallRecord record;
  record.kind = "embed";
  record.provider = config.provider;
  record.model = config.model_id;
  record.prompt_hash = fnv1a64(text);

  InFlightGuard guard(*this);
  if (config.provider == "mock") {
    pace(config);
    embedding::EmbeddingVector v = detail::mock_embed(seed_, text, config);
    record.ok = true;
    record.response_chars = v.dim();
    log_call(record);
    return v;
  }

  const std::string key = resolve_key(config);
  for (int attempt = 0;; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(
          std::chrono::milliseconds(backoff_ms(config, attempt - 1)));
    }
    pace(config);
    try {
      embedding::EmbeddingVector v =
          detail::http_embed_once(text, config, key);
      record.ok = true;
      record.retries = attempt;
      record.response_chars = v.dim();
      log_call(record);
      return v;
    } catch (const Error& e) {
      if (retryable(e) && attempt < config.max_retries) continue;
      record.ok = false;
      record.retries = attempt;
      record.error_kind = e.kind();
      log_call(record);
      throw;
    }
  }
}

}  // namespace assaygen::llm
