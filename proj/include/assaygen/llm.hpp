#pragma once

// Chat-completion and text-embedding access: an HTTP client for
// OpenAI-compatible endpoints plus a deterministic mock provider, with
// retries, rate limiting, a call log, and structured-output extraction.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "assaygen/embedding.hpp"

namespace assaygen::llm {

struct ProviderConfig {
  std::string provider = "mock";  // "mock" or "http"
  std::string base_url;           // e.g. http://127.0.0.1:8080/v1
  std::string api_key_env;        // empty means no key required
  std::string model_id = "mock-chat";
  double request_timeout = 30.0;  // seconds
  int max_retries = 3;            // hard cap 8
  double rate_per_second = 0.0;   // 0 disables pacing
  int backoff_initial_ms = 250;   // doubles per retry, capped at 4 s
  std::string fixtures_path;      // mock reply table, optional
  int mock_dim = 256;             // mock embedding width
};

struct ChatRequest {
  std::string prompt;
  double temperature = 1.0;
  int max_output_tokens = 2048;
  std::string model_id;  // overrides the config model when non-empty

  // Distinguishes repeated calls with an identical prompt (batched
  // generation). Real providers rely on sampling temperature and ignore it;
  // the mock folds it into its reply derivation, and fixture lookups for a
  // non-zero index key on prompt + "\n#sample:<index>".
  std::uint64_t sample_index = 0;
};

struct CallRecord {
  std::string kind;  // "chat" or "embed"
  std::string provider;
  std::string model;
  std::uint64_t prompt_hash = 0;
  int retries = 0;
  bool ok = false;
  std::string error_kind;
  std::size_t response_chars = 0;
};

class Gateway {
 public:
  explicit Gateway(std::uint64_t seed = 0, std::string call_log_path = {});

  // Returns the model reply text. Transient failures (HTTP 429/5xx,
  // transport errors) are retried with exponential backoff up to
  // max_retries; total attempts = retries + 1. Throws ConfigError,
  // AuthError, RateLimited, Timeout, or ProviderError.
  std::string chat(const ChatRequest& request, const ProviderConfig& config);

  // Returns a provider-dimensioned embedding. The mock provider derives a
  // unit vector from (seed, text). Errors as chat.
  embedding::EmbeddingVector embed_text(const std::string& text,
                                        const ProviderConfig& config);

  // Bounds concurrent provider calls across all threads (default 4).
  void set_max_in_flight(int n);

  std::uint64_t seed() const { return seed_; }
  CallRecord last_call() const;

 private:
  class InFlightGuard;

  void acquire_slot();
  void release_slot();
  void pace(const ProviderConfig& config);
  void log_call(const CallRecord& record);

  std::uint64_t seed_;
  std::string call_log_path_;

  mutable std::mutex state_mutex_;
  CallRecord last_call_;

  std::mutex slots_mutex_;
  std::condition_variable slots_cv_;
  int slot_limit_ = 4;
  int slots_in_use_ = 0;

  struct Bucket {
    double tokens = 1.0;
    std::chrono::steady_clock::time_point last;
    bool primed = false;
  };
  std::mutex buckets_mutex_;
  std::map<std::string, Bucket> buckets_;
};

// Finds the first well-formed JSON object in the text (string- and
// comment-aware brace matching, so fenced code blocks and // comments are
// handled), verifies the required keys, and returns all entries with values
// rendered as text. Boolean-like values normalize to "True"/"False".
// Throws NoObjectFound or MissingKey.
std::map<std::string, std::string> extract_structured(
    const std::string& text, const std::vector<std::string>& required_keys);

}  // namespace assaygen::llm
