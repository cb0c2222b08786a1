#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <string_view>

namespace assaygen {

/// FNV-1a 64-bit hash. Used for content digests and mock-provider keying;
/// stable across platforms, not cryptographic.
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ull) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string to_hex(std::uint64_t value);

/// Draw an index uniformly from [0, n). Uses plain rejection-free modulo on
/// the engine output; mt19937_64 is fully specified by the standard, so the
/// sequence is reproducible across compilers.
inline std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(rng() % n);
}

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

/// Shortest "%g"-style rendering of a double (trailing zeros trimmed),
/// e.g. 2100 -> "2100", 0.5 -> "0.5".
std::string format_number(double value);

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

}  // namespace assaygen
