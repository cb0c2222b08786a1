#include <cctype>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "assaygen/errors.hpp"
#include "assaygen/llm.hpp"

namespace assaygen::llm {

namespace {

// Walks from an opening brace to its matching close, skipping string
// literals and // and /* */ comments so that braces inside them do not
// affect the depth. Returns npos when the object never closes.
std::size_t matching_close(const std::string& text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  bool escaped = false;
  std::size_t i = open;
  while (i < text.size()) {
    char c = text[i];
    if (in_string) {
      if (escaped) {
        escaped = false;
      } else if (c == '\\') {
        escaped = true;
      } else if (c == '"') {
        in_string = false;
      }
      ++i;
      continue;
    }
    if (c == '"') {
      in_string = true;
      ++i;
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') ++i;
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '*') {
      std::size_t end = text.find("*/", i + 2);
      if (end == std::string::npos) return std::string::npos;
      i = end + 2;
      continue;
    }
    if (c == '{') ++depth;
    if (c == '}') {
      --depth;
      if (depth == 0) return i;
    }
    ++i;
  }
  return std::string::npos;
}

bool equals_ci(const std::string& a, const char* b) {
  std::size_t n = 0;
  while (b[n] != '\0') ++n;
  if (a.size() != n) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::tolower(static_cast<unsigned char>(a[i])) !=
        std::tolower(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

std::string value_as_text(const nlohmann::json& value) {
  if (value.is_boolean()) return value.get<bool>() ? "True" : "False";
  if (value.is_string()) {
    std::string s = value.get<std::string>();
    if (equals_ci(s, "true")) return "True";
    if (equals_ci(s, "false")) return "False";
    return s;
  }
  if (value.is_null()) return "null";
  return value.dump();
}

}  // namespace

std::map<std::string, std::string> extract_structured(
    const std::string& text, const std::vector<std::string>& required_keys) {
  std::size_t search_from = 0;
  while (true) {
    std::size_t open = text.find('{', search_from);
    if (open == std::string::npos) break;
    std::size_t close = matching_close(text, open);
    if (close == std::string::npos) {
      search_from = open + 1;
      continue;
    }
    nlohmann::json parsed = nlohmann::json::parse(
        text.begin() + static_cast<std::ptrdiff_t>(open),
        text.begin() + static_cast<std::ptrdiff_t>(close) + 1,
        nullptr, false, /*ignore_comments=*/true);
    if (parsed.is_discarded() || !parsed.is_object()) {
      search_from = open + 1;
      continue;
    }
    for (const auto& key : required_keys) {
      if (!parsed.contains(key)) throw MissingKey(key);
    }
    std::map<std::string, std::string> out;
    for (const auto& item : parsed.items()) {
      out[item.key()] = value_as_text(item.value());
    }
    return out;
  }
  throw NoObjectFound("no structured object in " +
                      std::to_string(text.size()) + " chars of text");
}

}  // namespace assaygen::llm
