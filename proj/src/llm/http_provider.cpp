#include <cmath>
#include <string>

#include <httplib.h>
#include <json.hpp>

#include "assaygen/errors.hpp"
#include "llm_internal.hpp"

// OpenAI-compatible chat-completion and embedding endpoints. One request
// per call; the retry loop lives in the gateway.

namespace assaygen::llm::detail {

namespace {

struct Endpoint {
  std::string origin;       // scheme://host[:port]
  std::string path_prefix;  // e.g. /v1, possibly empty
};

Endpoint split_base_url(const std::string& base_url) {
  std::size_t scheme_end = base_url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("base_url", "expected scheme://host[:port][/path]");
  }
  std::size_t path_start = base_url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) {
    return {base_url, ""};
  }
  std::string prefix = base_url.substr(path_start);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base_url.substr(0, path_start), prefix};
}

std::string post_json(const ProviderConfig& config, const std::string& api_key,
                      const std::string& path, const std::string& body) {
  Endpoint endpoint = split_base_url(config.base_url);
  httplib::Client client(endpoint.origin);
  auto seconds = static_cast<time_t>(config.request_timeout);
  auto microseconds = static_cast<time_t>(
      (config.request_timeout - std::floor(config.request_timeout)) * 1e6);
  client.set_connection_timeout(seconds, microseconds);
  client.set_read_timeout(seconds, microseconds);
  client.set_write_timeout(seconds, microseconds);

  httplib::Headers headers;
  if (!api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key);
  }
  auto result = client.Post(endpoint.path_prefix + path, headers, body,
                            "application/json");
  if (!result) {
    auto err = result.error();
    if (err == httplib::Error::ConnectionTimeout ||
        err == httplib::Error::Read || err == httplib::Error::Write) {
      throw Timeout(httplib::to_string(err));
    }
    throw ProviderError(0, httplib::to_string(err));
  }
  if (result->status == 429) {
    throw RateLimited("HTTP 429 from " + config.base_url);
  }
  if (result->status != 200) {
    throw ProviderError(result->status, result->body);
  }
  return result->body;
}

nlohmann::json parse_body(const std::string& body) {
  nlohmann::json parsed = nlohmann::json::parse(body, nullptr, false);
  if (parsed.is_discarded()) {
    throw ProviderError(200, "unparseable response body");
  }
  return parsed;
}

}  // namespace

std::string http_chat_once(const ChatRequest& request,
                           const ProviderConfig& config,
                           const std::string& api_key) {
  nlohmann::ordered_json body;
  body["model"] =
      request.model_id.empty() ? config.model_id : request.model_id;
  body["messages"] = nlohmann::json::array(
      {{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["max_tokens"] = request.max_output_tokens;

  nlohmann::json reply =
      parse_body(post_json(config, api_key, "/chat/completions", body.dump()));
  if (!reply.contains("choices") || !reply["choices"].is_array() ||
      reply["choices"].empty()) {
    throw ProviderError(200, "response has no choices");
  }
  const auto& first = reply["choices"][0];
  if (!first.contains("message") || !first["message"].contains("content") ||
      !first["message"]["content"].is_string()) {
    throw ProviderError(200, "response has no message content");
  }
  return first["message"]["content"].get<std::string>();
}

embedding::EmbeddingVector http_embed_once(const std::string& text,
                                           const ProviderConfig& config,
                                           const std::string& api_key) {
  nlohmann::ordered_json body;
  body["model"] = config.model_id;
  body["input"] = text;

  nlohmann::json reply =
      parse_body(post_json(config, api_key, "/embeddings", body.dump()));
  if (!reply.contains("data") || !reply["data"].is_array() ||
      reply["data"].empty() || !reply["data"][0].contains("embedding") ||
      !reply["data"][0]["embedding"].is_array()) {
    throw ProviderError(200, "response has no embedding data");
  }
  const auto& raw = reply["data"][0]["embedding"];
  std::vector<float> components;
  components.reserve(raw.size());
  for (const auto& value : raw) {
    if (!value.is_number()) {
      throw ProviderError(200, "non-numeric embedding component");
    }
    components.push_back(value.get<float>());
  }
  if (components.empty()) {
    throw ProviderError(200, "empty embedding");
  }
  return embedding::EmbeddingVector{std::move(components)};
}

}  // namespace assaygen::llm::detail
