#include <algorithm>
#include <cctype>
#include <cstdint>
#include <limits>
#include <string>
#include <tuple>
#include <vector>

#include "assaygen/chem.hpp"
#include "assaygen/errors.hpp"
#include "chem_internal.hpp"

namespace assaygen::chem {

namespace {

// Guard rails for pathological inputs; drug-scale molecules never approach
// either bound.
constexpr std::size_t kMaxComponentAtoms = 256;
constexpr int kLeafBudget = 20000;

struct Component {
  const Molecule* mol = nullptr;
  std::vector<int> atoms;  // global atom indices, local index = position
  std::vector<std::vector<std::pair<int, int>>> adj;  // local nbr, bond index
};

std::vector<Component> split_components(const Molecule& m) {
  auto adj = m.adjacency();
  std::vector<int> component_of(m.atoms.size(), -1);
  std::vector<Component> out;
  for (std::size_t start = 0; start < m.atoms.size(); ++start) {
    if (component_of[start] >= 0) continue;
    Component comp;
    comp.mol = &m;
    std::vector<int> queue{static_cast<int>(start)};
    component_of[start] = static_cast<int>(out.size());
    while (!queue.empty()) {
      int a = queue.back();
      queue.pop_back();
      comp.atoms.push_back(a);
      for (const auto& [nbr, bi] : adj[static_cast<std::size_t>(a)]) {
        (void)bi;
        if (component_of[static_cast<std::size_t>(nbr)] < 0) {
          component_of[static_cast<std::size_t>(nbr)] =
              static_cast<int>(out.size());
          queue.push_back(nbr);
        }
      }
    }
    std::sort(comp.atoms.begin(), comp.atoms.end());
    std::vector<int> local_of(m.atoms.size(), -1);
    for (std::size_t i = 0; i < comp.atoms.size(); ++i) {
      local_of[static_cast<std::size_t>(comp.atoms[i])] =
          static_cast<int>(i);
    }
    comp.adj.resize(comp.atoms.size());
    for (std::size_t i = 0; i < comp.atoms.size(); ++i) {
      for (const auto& [nbr, bi] :
           adj[static_cast<std::size_t>(comp.atoms[i])]) {
        comp.adj[i].push_back({local_of[static_cast<std::size_t>(nbr)], bi});
      }
    }
    out.push_back(std::move(comp));
  }
  return out;
}

int bond_code(BondOrder order) { return static_cast<int>(order); }

// Dense re-ranking of arbitrary sortable keys: equal keys share a rank,
// ranks are 0..classes-1 in key order.
template <typename Key>
std::vector<int> dense_ranks(const std::vector<Key>& keys) {
  std::vector<int> idx(keys.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
  });
  std::vector<int> ranks(keys.size(), 0);
  int rank = 0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    if (i > 0 && keys[static_cast<std::size_t>(idx[i])] !=
                     keys[static_cast<std::size_t>(idx[i - 1])]) {
      ++rank;
    }
    ranks[static_cast<std::size_t>(idx[i])] = rank;
  }
  return ranks;
}

std::vector<int> initial_ranks(const Component& comp) {
  using Key = std::tuple<std::string, int, int, int, int, int>;
  std::vector<Key> keys;
  keys.reserve(comp.atoms.size());
  for (std::size_t i = 0; i < comp.atoms.size(); ++i) {
    const Atom& atom =
        comp.mol->atoms[static_cast<std::size_t>(comp.atoms[i])];
    int order_sum = 0;
    for (const auto& [nbr, bi] : comp.adj[i]) {
      (void)nbr;
      order_sum += bond_code(comp.mol->bonds[static_cast<std::size_t>(bi)].order);
    }
    keys.push_back({atom.element, atom.aromatic ? 1 : 0, atom.charge,
                    atom.hydrogens, static_cast<int>(comp.adj[i].size()),
                    order_sum});
  }
  return dense_ranks(keys);
}

std::vector<int> refine(const Component& comp, std::vector<int> ranks) {
  using Key = std::pair<int, std::vector<std::pair<int, int>>>;
  while (true) {
    std::vector<Key> keys(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      std::vector<std::pair<int, int>> nbrs;
      nbrs.reserve(comp.adj[i].size());
      for (const auto& [nbr, bi] : comp.adj[i]) {
        nbrs.push_back(
            {bond_code(comp.mol->bonds[static_cast<std::size_t>(bi)].order),
             ranks[static_cast<std::size_t>(nbr)]});
      }
      std::sort(nbrs.begin(), nbrs.end());
      keys[i] = {ranks[i], std::move(nbrs)};
    }
    std::vector<int> next = dense_ranks(keys);
    if (next == ranks) return ranks;
    ranks = std::move(next);
  }
}

int first_tied_class(const std::vector<int>& ranks) {
  std::vector<int> count;
  for (int r : ranks) {
    if (static_cast<std::size_t>(r) >= count.size()) {
      count.resize(static_cast<std::size_t>(r) + 1, 0);
    }
    ++count[static_cast<std::size_t>(r)];
  }
  for (std::size_t r = 0; r < count.size(); ++r) {
    if (count[r] > 1) return static_cast<int>(r);
  }
  return -1;
}

// ---- writer ----------------------------------------------------------

struct Writer {
  const Component& comp;
  const std::vector<int>& ranks;
  std::vector<std::vector<std::pair<int, int>>> ordered;  // adj by rank
  std::vector<bool> visited;
  std::vector<bool> bond_is_ring;
  std::vector<int> digit_of_bond;
  std::vector<bool> digit_in_use;
  std::string out;

  Writer(const Component& c, const std::vector<int>& r)
      : comp(c), ranks(r) {
    ordered = comp.adj;
    for (auto& nbrs : ordered) {
      std::sort(nbrs.begin(), nbrs.end(), [&](const auto& x, const auto& y) {
        return ranks[static_cast<std::size_t>(x.first)] <
               ranks[static_cast<std::size_t>(y.first)];
      });
    }
    visited.assign(comp.atoms.size(), false);
    bond_is_ring.assign(comp.mol->bonds.size(), false);
    digit_of_bond.assign(comp.mol->bonds.size(), 0);
    digit_in_use.assign(100, false);
  }

  void classify(int a, int parent_bond) {
    visited[static_cast<std::size_t>(a)] = true;
    for (const auto& [nbr, bi] : ordered[static_cast<std::size_t>(a)]) {
      if (bi == parent_bond) continue;
      if (!visited[static_cast<std::size_t>(nbr)]) {
        classify(nbr, bi);
      } else if (!bond_is_ring[static_cast<std::size_t>(bi)]) {
        bond_is_ring[static_cast<std::size_t>(bi)] = true;
      }
    }
  }

  std::string bond_symbol(int bi) const {
    const Bond& bond = comp.mol->bonds[static_cast<std::size_t>(bi)];
    bool both_aromatic = comp.mol->atoms[static_cast<std::size_t>(bond.from)]
                             .aromatic &&
                         comp.mol->atoms[static_cast<std::size_t>(bond.to)]
                             .aromatic;
    switch (bond.order) {
      case BondOrder::kSingle:
        return both_aromatic ? "-" : "";
      case BondOrder::kDouble:
        return "=";
      case BondOrder::kTriple:
        return "#";
      case BondOrder::kAromatic:
        return both_aromatic ? "" : ":";
    }
    return "";
  }

  std::string atom_token(int local) const {
    const Atom& atom =
        comp.mol->atoms[static_cast<std::size_t>(comp.atoms[
            static_cast<std::size_t>(local)])];
    int n_aromatic = 0;
    int non_aromatic_sum = 0;
    for (const auto& [nbr, bi] : comp.adj[static_cast<std::size_t>(local)]) {
      (void)nbr;
      BondOrder order = comp.mol->bonds[static_cast<std::size_t>(bi)].order;
      if (order == BondOrder::kAromatic) {
        ++n_aromatic;
      } else {
        non_aromatic_sum += static_cast<int>(order);
      }
    }
    bool bare_ok = false;
    if (atom.element == "*") {
      bare_ok = atom.charge == 0 && atom.hydrogens == 0;
    } else if (detail::organic_subset(atom.element) && atom.charge == 0) {
      bool symbol_ok = !atom.aromatic || atom.element == "B" ||
                       atom.element == "C" || atom.element == "N" ||
                       atom.element == "O" || atom.element == "P" ||
                       atom.element == "S";
      bare_ok = symbol_ok &&
                atom.hydrogens ==
                    detail::implied_hydrogens(atom.element, atom.aromatic,
                                              n_aromatic, non_aromatic_sum);
    }
    std::string symbol = atom.element;
    if (atom.aromatic) {
      for (char& ch : symbol) {
        ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
      }
    }
    if (bare_ok) return symbol;
    std::string token = "[" + symbol;
    if (atom.hydrogens == 1) {
      token += "H";
    } else if (atom.hydrogens > 1) {
      token += "H" + std::to_string(atom.hydrogens);
    }
    if (atom.charge == 1) {
      token += "+";
    } else if (atom.charge == -1) {
      token += "-";
    } else if (atom.charge > 1) {
      token += "+" + std::to_string(atom.charge);
    } else if (atom.charge < -1) {
      token += "-" + std::to_string(-atom.charge);
    }
    token += "]";
    return token;
  }

  void emit_ring_digit(int bi) {
    if (digit_of_bond[static_cast<std::size_t>(bi)] == 0) {
      int digit = 0;
      for (int d = 1; d < 100; ++d) {
        if (!digit_in_use[static_cast<std::size_t>(d)]) {
          digit = d;
          break;
        }
      }
      if (digit == 0) throw Error("CanonicalizationOverflow",
                                  "more than 99 open ring bonds");
      digit_in_use[static_cast<std::size_t>(digit)] = true;
      digit_of_bond[static_cast<std::size_t>(bi)] = digit;
      out += bond_symbol(bi);
      out += digit < 10 ? std::to_string(digit) : "%" + std::to_string(digit);
    } else {
      int digit = digit_of_bond[static_cast<std::size_t>(bi)];
      digit_in_use[static_cast<std::size_t>(digit)] = false;
      out += digit < 10 ? std::to_string(digit) : "%" + std::to_string(digit);
    }
  }

  void write(int a, int parent_bond) {
    visited[static_cast<std::size_t>(a)] = true;
    out += atom_token(a);
    std::vector<std::pair<int, int>> children;
    for (const auto& [nbr, bi] : ordered[static_cast<std::size_t>(a)]) {
      if (bi == parent_bond) continue;
      if (bond_is_ring[static_cast<std::size_t>(bi)]) {
        emit_ring_digit(bi);
      } else {
        children.push_back({nbr, bi});
      }
    }
    for (std::size_t i = 0; i < children.size(); ++i) {
      const auto& [child, bi] = children[i];
      bool last = i + 1 == children.size();
      if (!last) out += "(";
      out += bond_symbol(bi);
      write(child, bi);
      if (!last) out += ")";
    }
  }

  std::string render() {
    int root = 0;
    for (std::size_t i = 1; i < comp.atoms.size(); ++i) {
      if (ranks[i] < ranks[static_cast<std::size_t>(root)]) {
        root = static_cast<int>(i);
      }
    }
    classify(root, -1);
    visited.assign(comp.atoms.size(), false);
    write(root, -1);
    return out;
  }
};

std::string write_component(const Component& comp,
                            const std::vector<int>& ranks) {
  Writer writer(comp, ranks);
  return writer.render();
}

void search_canonical(const Component& comp, std::vector<int> ranks,
                      std::string& best, int& leaves) {
  ranks = refine(comp, ranks);
  int tied = first_tied_class(ranks);
  if (tied < 0) {
    if (--leaves < 0) {
      throw Error("CanonicalizationOverflow", "symmetry search budget spent");
    }
    std::string s = write_component(comp, ranks);
    if (best.empty() || s < best) best = s;
    return;
  }
  for (std::size_t a = 0; a < ranks.size(); ++a) {
    if (ranks[a] != tied) continue;
    std::vector<int> branched(ranks.size());
    for (std::size_t i = 0; i < ranks.size(); ++i) {
      branched[i] = ranks[i] * 2 + 1;
    }
    branched[a] -= 1;
    search_canonical(comp, std::move(branched), best, leaves);
  }
}

std::string canonical_component(const Component& comp) {
  if (comp.atoms.size() > kMaxComponentAtoms) {
    throw Error("CanonicalizationOverflow",
                "component exceeds " + std::to_string(kMaxComponentAtoms) +
                    " atoms");
  }
  std::string best;
  int leaves = kLeafBudget;
  search_canonical(comp, initial_ranks(comp), best, leaves);
  return best;
}

}  // namespace

std::string canonicalize(const Molecule& m) {
  if (m.atoms.empty()) return "";
  std::vector<std::string> parts;
  for (const Component& comp : split_components(m)) {
    parts.push_back(canonical_component(comp));
  }
  std::sort(parts.begin(), parts.end());
  std::string joined;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) joined += ".";
    joined += parts[i];
  }
  return joined;
}

std::string render_smiles(const Molecule& m, const std::vector<int>& ranks) {
  if (ranks.size() != m.atoms.size()) {
    throw SizeMismatch("rank count differs from atom count");
  }
  std::vector<Component> comps = split_components(m);
  std::vector<std::pair<int, std::string>> parts;
  for (const Component& comp : comps) {
    std::vector<int> local(comp.atoms.size());
    int min_rank = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < comp.atoms.size(); ++i) {
      local[i] = ranks[static_cast<std::size_t>(comp.atoms[i])];
      min_rank = std::min(min_rank, local[i]);
    }
    parts.push_back({min_rank, write_component(comp, local)});
  }
  std::sort(parts.begin(), parts.end());
  std::string joined;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) joined += ".";
    joined += parts[i].second;
  }
  return joined;
}

}  // namespace assaygen::chem
