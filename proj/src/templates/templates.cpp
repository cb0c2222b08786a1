#include <string>

#include "assaygen/errors.hpp"
#include "assaygen/templates.hpp"
#include "assaygen/util.hpp"

namespace assaygen::templates {

std::string file_name(Id id) {
  switch (id) {
    case Id::kSummarization:
      return "summarization.txt";
    case Id::kGeneration:
      return "generation.txt";
    case Id::kRelevance:
      return "relevance.txt";
    case Id::kAblation:
      return "ablation.txt";
    case Id::kOptimization:
      return "optimization.txt";
  }
  throw ConfigError("template_id", "unknown template");
}

std::string load(const std::string& dir, Id id) {
  return read_file(std::filesystem::path(dir) / file_name(id));
}

std::string render(
    const std::string& template_text,
    const std::vector<std::pair<std::string, std::string>>& values) {
  std::string out = template_text;
  for (const auto& [name, value] : values) {
    const std::string marker = "{" + name + "}";
    std::size_t pos = out.find(marker);
    if (pos == std::string::npos) {
      throw MissingPlaceholder(name);
    }
    while (pos != std::string::npos) {
      out.replace(pos, marker.size(), value);
      pos = out.find(marker, pos + value.size());
    }
  }
  return out;
}

}  // namespace assaygen::templates
