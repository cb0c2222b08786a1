#pragma once

#include <cstdint>
#include <string>

#include "assaygen/llm.hpp"

namespace assaygen::llm::detail {

std::string mock_chat(std::uint64_t seed, const ChatRequest& request,
                      const ProviderConfig& config);
embedding::EmbeddingVector mock_embed(std::uint64_t seed,
                                      const std::string& text,
                                      const ProviderConfig& config);

// One attempt, no retries; throws RateLimited / Timeout / ProviderError.
std::string http_chat_once(const ChatRequest& request,
                           const ProviderConfig& config,
                           const std::string& api_key);
embedding::EmbeddingVector http_embed_once(const std::string& text,
                                           const ProviderConfig& config,
                                           const std::string& api_key);

}  // namespace assaygen::llm::detail
