#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "assaygen/errors.hpp"
#include "assaygen/util.hpp"
#include "llm_internal.hpp"

// The mock provider answers every prompt family the pipeline issues, fully
// determined by (gateway seed, prompt text). Fixture files override replies
// for specific prompts; everything else falls through to generators below.

namespace assaygen::llm::detail {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t prompt_hash) {
  std::uint64_t state = seed * 0x9e3779b97f4a7c15ull ^ prompt_hash;
  return splitmix64(state);
}

bool contains_ci(const std::string& haystack, const std::string& needle) {
  std::string h = to_lower(haystack);
  return h.find(to_lower(needle)) != std::string::npos;
}

// Text following the final "BioAssay JSON" heading: the record payload part
// of a filled summarization or relevance template. Falls back to the whole
// prompt when the heading is absent.
std::string payload_part(const std::string& prompt) {
  static const std::string kHeading = "BioAssay JSON";
  std::size_t pos = prompt.rfind(kHeading);
  if (pos == std::string::npos) return prompt;
  return prompt.substr(pos + kHeading.size());
}

const std::vector<std::string>& palette() {
  static const std::vector<std::string> kMolecules = {
      "CCO",
      "CC(=O)O",
      "c1ccccc1",
      "Cc1ccccc1",
      "CC(=O)Nc1ccc(O)cc1",
      "CC(=O)Oc1ccccc1C(=O)O",
      "CN1C=NC2=C1C(=O)N(C)C(=O)N2C",
      "CC(C)Cc1ccc(cc1)C(C)C(=O)O",
      "c1ccc2ccccc2c1",
      "Oc1ccc2ccccc2c1",
      "NC(=O)c1ccccc1",
      "CCN(CC)CC",
      "CC(N)Cc1ccccc1",
      "CN(C)CCc1ccccc1",
      "Clc1ccccc1",
      "Fc1ccc(F)cc1",
      "Brc1ccccc1",
      "CCOC(=O)c1ccccc1",
      "CSc1ccccc1",
      "CS(=O)(=O)c1ccccc1",
      "NS(=O)(=O)c1ccccc1",
      "OCC(O)CO",
      "NCCc1ccc(O)c(O)c1",
      "CC(O)c1ccccc1",
      "COc1ccc(CCN)cc1",
      "c1ccncc1",
      "c1ccc2[nH]ccc2c1",
      "c1ccc(cc1)c1ccccc1",
      "OC(=O)c1ccncc1",
      "Cc1ccc(C)cc1",
      "CCCCCC",
      "C1CCCCC1",
      "C1CCNCC1",
      "O=C1CCCCC1",
      "C1CCOC1",
      "c1ccsc1",
      "c1ccoc1",
      "CC(C)(C)c1ccccc1",
      "N#Cc1ccccc1",
      "CC#N",
      "C=CC=C",
      "OC(=O)CCC(=O)O",
      "CNC(=O)c1ccccc1",
      "COC(=O)C1CCCCC1",
      "Cc1cccc(C)n1",
      "CC(C)NCC(O)COc1ccccc1",
      "Clc1ccc(Cl)cc1",
      "CCOCC",
      "C1CC",  // unclosed ring, deliberately invalid
      "CC(C",  // unmatched paren, deliberately invalid
  };
  return kMolecules;
}

std::string numbered_blocks(std::uint64_t key) {
  const auto& mols = palette();
  std::string out;
  std::uint64_t state = key;
  for (int i = 1; i <= 10; ++i) {
    std::size_t pick = static_cast<std::size_t>(splitmix64(state) %
                                                mols.size());
    out += std::to_string(i) + ". [BOS] " + mols[pick] + " [EOS]\n";
  }
  return out;
}

std::string summarization_reply(std::uint64_t key, const std::string& prompt) {
  static const char* kAssayTypes[] = {"Enzymatic Inhibition",
                                      "Fluorescence Assay",
                                      "Radioligand Binding", "SPR"};
  std::uint64_t state = key;
  std::string tag = to_hex(splitmix64(state)).substr(8);
  bool counter = contains_ci(payload_part(prompt), "counterscreen");
  nlohmann::ordered_json body;
  body["BioAssay_Summary"] =
      "This assay measures inhibition of the studied target protein; "
      "run tag " + tag + ".";
  body["Assay_Type"] = kAssayTypes[splitmix64(state) % 4];
  body["Summary_of_Observations"] =
      "Potency tracks scaffold similarity among the listed molecules; "
      "run tag " + tag + ".";
  body["CounterScreen"] = counter ? "True" : "False";
  return "Here is the extracted data:\n```json\n" + body.dump(2) + "\n```\n";
}

std::string relevance_reply(const std::string& prompt) {
  std::string payload = payload_part(prompt);
  bool unrelated = contains_ci(payload, "counterscreen") ||
                   contains_ci(payload, "irrelevant");
  return std::string("Assessment: {\"Relevant\": \"") +
         (unrelated ? "False" : "True") + "\"}\n";
}

std::string generation_reply(std::uint64_t key) {
  std::uint64_t state = key;
  std::string nonce = to_hex(splitmix64(state));
  std::string out;
  out += "1. BioAssay Understanding & Analysis\n";
  out += "The assays describe inhibition of the query protein.\n\n";
  out += "2. Selected Reference Molecules from BioAssay\n";
  out += "Active rows with the lowest reported values were used.\n\n";
  out += "3. Generated Molecules\n";
  out += numbered_blocks(key);
  out += "\n4. Justification for Molecular Selection\n";
  out += "Scaffolds follow the active references; run tag " + nonce + ".\n";
  return out;
}

std::string keyword_reply(const std::string& prompt) {
  static const std::string kMarker = "comma-separated list.";
  std::size_t pos = prompt.find(kMarker);
  std::string tail =
      pos == std::string::npos ? prompt : prompt.substr(pos + kMarker.size());
  std::vector<std::string> words;
  std::string current;
  auto flush = [&] {
    if (current.size() >= 5) {
      std::string lowered = to_lower(current);
      bool seen = false;
      for (const auto& w : words) {
        if (to_lower(w) == lowered) seen = true;
      }
      if (!seen && words.size() < 5) words.push_back(current);
    }
    current.clear();
  };
  for (char c : tail) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(c);
    } else {
      flush();
    }
  }
  flush();
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += ", ";
    out += words[i];
  }
  return out;
}

// Fixture table: {"by_hash": {"<16 hex of fnv1a64(prompt)>": reply},
// "by_contains": [{"needle": text, "reply": text}, ...]}. Exact hash match
// wins; needles are tried in file order.
const nlohmann::json* load_fixtures(const std::string& path) {
  static std::mutex mutex;
  static std::map<std::string, nlohmann::json> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(path);
  if (it == cache.end()) {
    nlohmann::json parsed;
    try {
      parsed = nlohmann::json::parse(read_file(path));
    } catch (const std::exception& e) {
      throw ConfigError("fixtures_path", path + ": " + e.what());
    }
    it = cache.emplace(path, std::move(parsed)).first;
  }
  return &it->second;
}

bool fixture_reply(const ProviderConfig& config, const std::string& prompt,
                   std::string& reply) {
  if (config.fixtures_path.empty()) return false;
  const nlohmann::json& table = *load_fixtures(config.fixtures_path);
  if (table.contains("by_hash")) {
    const auto& by_hash = table.at("by_hash");
    std::string key = to_hex(fnv1a64(prompt));
    if (by_hash.contains(key)) {
      reply = by_hash.at(key).get<std::string>();
      return true;
    }
  }
  if (table.contains("by_contains")) {
    for (const auto& entry : table.at("by_contains")) {
      if (prompt.find(entry.at("needle").get<std::string>()) !=
          std::string::npos) {
        reply = entry.at("reply").get<std::string>();
        return true;
      }
    }
  }
  return false;
}

}  // namespace

std::string mock_chat(std::uint64_t seed, const ChatRequest& request,
                      const ProviderConfig& config) {
  std::string prompt = request.prompt;
  if (request.sample_index != 0) {
    prompt += "\n#sample:" + std::to_string(request.sample_index);
  }
  std::string reply;
  if (fixture_reply(config, prompt, reply)) return reply;

  std::uint64_t key = mix(seed, fnv1a64(prompt));
  if (prompt.find("BioAssay_Summary") != std::string::npos) {
    return summarization_reply(key, prompt);
  }
  if (prompt.find("\"Relevant\"") != std::string::npos) {
    return relevance_reply(prompt);
  }
  if (prompt.find("ten optimized SMILES") != std::string::npos) {
    return numbered_blocks(key);
  }
  if (prompt.find("[BOS]") != std::string::npos) {
    return generation_reply(key);
  }
  if (prompt.find("comma-separated") != std::string::npos) {
    return keyword_reply(prompt);
  }
  return "mock-reply-" + to_hex(key);
}

embedding::EmbeddingVector mock_embed(std::uint64_t seed,
                                      const std::string& text,
                                      const ProviderConfig& config) {
  std::mt19937_64 rng(mix(seed + 0x5eedull, fnv1a64(text)));
  auto uniform = [&rng] {
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  };
  std::size_t dim = static_cast<std::size_t>(config.mock_dim);
  std::vector<float> components(dim);
  for (std::size_t i = 0; i < dim; i += 2) {
    double u1 = uniform();
    double u2 = uniform();
    double radius = std::sqrt(-2.0 * std::log(u1));
    double angle = 2.0 * 3.14159265358979323846 * u2;
    components[i] = static_cast<float>(radius * std::cos(angle));
    if (i + 1 < dim) {
      components[i + 1] = static_cast<float>(radius * std::sin(angle));
    }
  }
  double norm_sqr = 0.0;
  for (float c : components) norm_sqr += static_cast<double>(c) * c;
  if (norm_sqr <= 0.0) {
    components[0] = 1.0f;
    norm_sqr = 1.0;
  }
  double inv = 1.0 / std::sqrt(norm_sqr);
  for (float& c : components) c = static_cast<float>(c * inv);
  return embedding::EmbeddingVector{std::move(components)};
}

}  // namespace assaygen::llm::detail
