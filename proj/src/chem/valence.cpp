#include <algorithm>
#include <array>
#include <cstdlib>
#include <string>
#include <unordered_set>
#include <vector>

#include "assaygen/chem.hpp"
#include "assaygen/errors.hpp"
#include "chem_internal.hpp"

namespace assaygen::chem::detail {

namespace {

const std::unordered_set<std::string>& element_symbols() {
  static const std::unordered_set<std::string> kSymbols = {
      "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
      "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr",
      "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Kr",
      "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
      "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
      "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf",
      "Ta", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po",
      "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U",  "Np", "Pu", "Am", "Cm",
      "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
      "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og", "*"};
  return kSymbols;
}

struct ValenceRow {
  const char* symbol;
  int group;  // periodic group, drives the charge adjustment
  std::array<int, 3> valences;
  int count;
};

constexpr ValenceRow kValenceTable[] = {
    {"B", 13, {3, 0, 0}, 1},  {"C", 14, {4, 0, 0}, 1},
    {"Si", 14, {4, 0, 0}, 1}, {"N", 15, {3, 0, 0}, 1},
    {"P", 15, {3, 5, 0}, 2},  {"O", 16, {2, 0, 0}, 1},
    {"S", 16, {2, 4, 6}, 3},  {"F", 17, {1, 0, 0}, 1},
    {"Cl", 17, {1, 0, 0}, 1}, {"Br", 17, {1, 0, 0}, 1},
    {"I", 17, {1, 0, 0}, 1},
};

const ValenceRow* find_valence_row(const std::string& symbol) {
  for (const auto& row : kValenceTable) {
    if (symbol == row.symbol) return &row;
  }
  return nullptr;
}

}  // namespace

bool element_known(const std::string& symbol) {
  return element_symbols().count(symbol) > 0;
}

bool organic_subset(const std::string& symbol) {
  return symbol == "B" || symbol == "C" || symbol == "N" || symbol == "O" ||
         symbol == "P" || symbol == "S" || symbol == "F" || symbol == "Cl" ||
         symbol == "Br" || symbol == "I";
}

bool aromatic_capable(const std::string& symbol) {
  return symbol == "B" || symbol == "C" || symbol == "N" || symbol == "O" ||
         symbol == "P" || symbol == "S" || symbol == "Se" || symbol == "As" ||
         symbol == "Te";
}

bool lone_pair_aromatic(const std::string& symbol) {
  return symbol == "N" || symbol == "P" || symbol == "O" || symbol == "S" ||
         symbol == "Se" || symbol == "As" || symbol == "Te";
}

std::vector<int> allowed_valences(const std::string& symbol, int charge) {
  if (symbol == "H") return {charge == 0 ? 1 : 0};
  const ValenceRow* row = find_valence_row(symbol);
  if (row == nullptr) return {};
  std::vector<int> out;
  for (int i = 0; i < row->count; ++i) {
    int base = row->valences[static_cast<std::size_t>(i)];
    int adjusted = base;
    if (row->group == 13) {
      adjusted = base - charge;
    } else if (row->group == 14) {
      adjusted = base - std::abs(charge);
    } else {
      adjusted = base + charge;
    }
    if (adjusted >= 0) out.push_back(adjusted);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int implied_hydrogens(const std::string& symbol, bool aromatic,
                      int n_aromatic_bonds, int non_aromatic_order_sum) {
  const ValenceRow* row = find_valence_row(symbol);
  if (row == nullptr) return 0;
  int bond_sum = aromatic_contribution(n_aromatic_bonds) +
                 non_aromatic_order_sum;
  if (aromatic) {
    int h = row->valences[0] - bond_sum;
    return h > 0 ? h : 0;
  }
  for (int i = 0; i < row->count; ++i) {
    int v = row->valences[static_cast<std::size_t>(i)];
    if (v >= bond_sum) return v - bond_sum;
  }
  return 0;
}

void check_valences(const Molecule& m) {
  auto adj = m.adjacency();
  for (std::size_t ai = 0; ai < m.atoms.size(); ++ai) {
    const Atom& atom = m.atoms[ai];
    if (atom.element == "*") continue;
    int n_aromatic = 0;
    int non_aromatic_sum = 0;
    for (const auto& [nbr, bi] : adj[ai]) {
      (void)nbr;
      BondOrder order = m.bonds[static_cast<std::size_t>(bi)].order;
      if (order == BondOrder::kAromatic) {
        ++n_aromatic;
      } else {
        non_aromatic_sum += static_cast<int>(order);
      }
    }
    if (atom.aromatic && (n_aromatic < 2 || n_aromatic > 3)) {
      throw ValenceError(static_cast<int>(ai),
                         "aromatic atom needs two or three ring bonds");
    }
    std::vector<int> allowed = allowed_valences(atom.element, atom.charge);
    if (allowed.empty()) continue;
    int max_allowed = allowed.back();
    int delocalized = aromatic_contribution(n_aromatic) + non_aromatic_sum +
                      atom.hydrogens;
    if (delocalized <= max_allowed) continue;
    if (atom.aromatic && n_aromatic == 2 &&
        lone_pair_aromatic(atom.element)) {
      int donor = n_aromatic + non_aromatic_sum + atom.hydrogens;
      if (donor <= max_allowed) continue;
    }
    throw ValenceError(static_cast<int>(ai),
                       "valence " + std::to_string(delocalized) +
                           " exceeds maximum " + std::to_string(max_allowed) +
                           " for " + atom.element);
  }
}

}  // namespace assaygen::chem::detail
