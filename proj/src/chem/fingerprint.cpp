#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "assaygen/chem.hpp"
#include "assaygen/errors.hpp"
#include "assaygen/kernels.hpp"
#include "assaygen/util.hpp"

namespace assaygen::chem {

namespace {

std::uint64_t hash_words(const std::vector<std::uint64_t>& words) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint64_t w : words) {
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (w >> (8 * byte)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

}  // namespace

bool Fingerprint::test(int bit) const {
  return (words[static_cast<std::size_t>(bit / 64)] >>
          (static_cast<unsigned>(bit) % 64)) & 1u;
}

void Fingerprint::set(int bit) {
  words[static_cast<std::size_t>(bit / 64)] |= 1ull
                                               << (static_cast<unsigned>(bit) %
                                                   64);
}

int Fingerprint::count() const {
  return static_cast<int>(
      kernels::popcount_and(words.data(), words.data(), words.size()));
}

std::vector<int> Fingerprint::set_bits() const {
  std::vector<int> out;
  for (int bit = 0; bit < nbits; ++bit) {
    if (test(bit)) out.push_back(bit);
  }
  return out;
}

std::string Fingerprint::to_hex() const {
  std::string out;
  out.reserve(words.size() * 16);
  char buf[17];
  for (std::uint64_t w : words) {
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(w));
    out += buf;
  }
  return out;
}

Fingerprint make_fingerprint(int nbits) {
  if (nbits <= 0) throw ConfigError("nbits", "must be positive");
  Fingerprint fp;
  fp.nbits = nbits;
  fp.words.assign(static_cast<std::size_t>((nbits + 63) / 64), 0);
  return fp;
}

Fingerprint morgan_fingerprint(const Molecule& m, int radius, int nbits) {
  if (radius < 0) throw ConfigError("radius", "must be non-negative");
  Fingerprint fp = make_fingerprint(nbits);
  auto adj = m.adjacency();
  std::size_t n = m.atoms.size();

  std::vector<std::uint64_t> inv(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Atom& atom = m.atoms[i];
    std::string key = atom.element;
    key += '|';
    key += atom.aromatic ? '1' : '0';
    key += '|';
    key += std::to_string(atom.charge);
    key += '|';
    key += std::to_string(atom.hydrogens);
    key += '|';
    key += std::to_string(adj[i].size());
    inv[i] = fnv1a64(key);
    fp.set(static_cast<int>(inv[i] % static_cast<std::uint64_t>(nbits)));
  }

  for (int r = 1; r <= radius; ++r) {
    std::vector<std::uint64_t> next(n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<std::uint64_t> env;
      for (const auto& [nbr, bi] : adj[i]) {
        std::uint64_t code = static_cast<std::uint64_t>(
            m.bonds[static_cast<std::size_t>(bi)].order);
        env.push_back((code << 56) ^ inv[static_cast<std::size_t>(nbr)]);
      }
      std::sort(env.begin(), env.end());
      std::vector<std::uint64_t> words;
      words.reserve(env.size() + 2);
      words.push_back(static_cast<std::uint64_t>(r));
      words.push_back(inv[i]);
      words.insert(words.end(), env.begin(), env.end());
      next[i] = hash_words(words);
      fp.set(static_cast<int>(next[i] % static_cast<std::uint64_t>(nbits)));
    }
    inv = std::move(next);
  }
  return fp;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  if (a.nbits != b.nbits) {
    throw SizeMismatch("fingerprints have " + std::to_string(a.nbits) +
                       " and " + std::to_string(b.nbits) + " bits");
  }
  kernels::AndOrCount counts =
      kernels::popcount_and_or(a.words.data(), b.words.data(), a.words.size());
  if (counts.either == 0) return 1.0;
  return static_cast<double>(counts.both) /
         static_cast<double>(counts.either);
}

double diversity_from_fingerprints(const std::vector<Fingerprint>& fps) {
  if (fps.size() < 2) throw TooFew("diversity needs at least two molecules");
  double total = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < fps.size(); ++i) {
    for (std::size_t j = i + 1; j < fps.size(); ++j) {
      total += tanimoto(fps[i], fps[j]);
      ++pairs;
    }
  }
  return 1.0 - total / static_cast<double>(pairs);
}

double diversity(const std::vector<Molecule>& mols) {
  if (mols.size() < 2) throw TooFew("diversity needs at least two molecules");
  std::vector<Fingerprint> fps;
  fps.reserve(mols.size());
  for (const Molecule& m : mols) fps.push_back(morgan_fingerprint(m));
  return diversity_from_fingerprints(fps);
}

}  // namespace assaygen::chem
