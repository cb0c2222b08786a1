#pragma once

// Molecular graph core: SMILES parsing, valence validation, canonical
// rendering, Morgan fingerprints, Tanimoto similarity, and set diversity.

#include <cstdint>
#include <string>
#include <vector>

namespace assaygen::chem {

enum class BondOrder : int {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

struct Atom {
  std::string element;  // element symbol, or "*" for a wildcard atom
  bool aromatic = false;
  int charge = 0;
  int isotope = 0;  // 0 = unspecified
  int hydrogens = 0;  // attached hydrogens, explicit or inferred
  bool bracketed = false;
  std::string chirality;  // "", "@", "@@"; retained annotation only
  int atom_class = 0;
};

struct Bond {
  int from = 0;
  int to = 0;
  BondOrder order = BondOrder::kSingle;
  int direction = 0;  // -1 '\', +1 '/'; retained annotation only
};

struct Molecule {
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::string canonical_smiles;
  int heavy_atom_count = 0;

  // adjacency()[atom] lists {neighbor atom index, bond index}.
  std::vector<std::vector<std::pair<int, int>>> adjacency() const;
};

struct Fingerprint {
  int nbits = 2048;
  std::vector<std::uint64_t> words;  // packed little-endian bit words

  bool test(int bit) const;
  void set(int bit);
  int count() const;
  std::vector<int> set_bits() const;
  // One line per fingerprint: each 64-bit word as 16 lowercase hex digits,
  // words in ascending bit order.
  std::string to_hex() const;
};

Fingerprint make_fingerprint(int nbits);

// Parses one SMILES string, validates valence, and fills canonical_smiles.
// Throws SyntaxError, UnclosedRing, UnmatchedParen, or ValenceError.
Molecule parse_smiles(const std::string& text);

// Deterministic atom-order-independent rendering. Stereo, isotope, and
// atom-class annotations are dropped from the output.
std::string canonicalize(const Molecule& m);

// Renders the molecule with an arbitrary priority order (lower rank written
// first). ranks must be a permutation of 0..atoms-1. Used by the
// permutation-invariance harness; canonicalize() is the deterministic form.
std::string render_smiles(const Molecule& m, const std::vector<int>& ranks);

Fingerprint morgan_fingerprint(const Molecule& m, int radius = 2,
                               int nbits = 2048);

// |a AND b| / |a OR b|; 1.0 when both fingerprints are empty.
// Throws SizeMismatch when nbits differ.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// 1 - mean pairwise tanimoto over all unordered pairs. Throws TooFew for
// fewer than two inputs.
double diversity(const std::vector<Molecule>& mols);
double diversity_from_fingerprints(const std::vector<Fingerprint>& fps);

}  // namespace assaygen::chem
