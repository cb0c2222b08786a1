#pragma once

// Prompt templates stored as files with {name} placeholders, plus the
// renderer that fills them.

#include <string>
#include <utility>
#include <vector>

namespace assaygen::templates {

enum class Id {
  kSummarization,
  kGeneration,
  kRelevance,
  kAblation,
  kOptimization,
};

// File name of a built-in template inside the template directory.
std::string file_name(Id id);

// Loads <dir>/<file_name(id)>. Throws NotFound.
std::string load(const std::string& dir, Id id);

// Replaces every "{name}" occurrence for each provided pair, in pair order.
// Brace text that matches no provided name is left as written. Throws
// MissingPlaceholder when a provided name never occurs.
std::string render(
    const std::string& template_text,
    const std::vector<std::pair<std::string, std::string>>& values);

}  // namespace assaygen::templates
