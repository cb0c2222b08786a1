#pragma once

#include <string>
#include <vector>

#include "assaygen/chem.hpp"

namespace assaygen::chem::detail {

bool element_known(const std::string& symbol);

// Elements writable without brackets: B C N O P S F Cl Br I.
bool organic_subset(const std::string& symbol);

// Elements that may carry the aromatic flag.
bool aromatic_capable(const std::string& symbol);

// Allowed total valences for an element/charge pair, ascending. Empty means
// the element is outside the table and is not valence-checked.
std::vector<int> allowed_valences(const std::string& symbol, int charge);

// Valence consumed by n aromatic bonds in the delocalized reading.
inline int aromatic_contribution(int n_aromatic) { return (3 * n_aromatic) / 2; }

// Heteroatoms that may instead donate a lone pair to the ring, counting each
// of their two aromatic bonds as a single bond (pyrrole N, furan O).
bool lone_pair_aromatic(const std::string& symbol);

// Hydrogen count a bare (unbracketed) atom acquires in this bond
// environment, clamped at zero.
int implied_hydrogens(const std::string& symbol, bool aromatic,
                      int n_aromatic_bonds, int non_aromatic_order_sum);

// Throws ValenceError if any atom exceeds its allowed valence. Assumes
// hydrogens are already assigned.
void check_valences(const Molecule& m);

}  // namespace assaygen::chem::detail
