#include <cctype>
#include <map>
#include <string>
#include <vector>

#include "assaygen/chem.hpp"
#include "assaygen/errors.hpp"
#include "chem_internal.hpp"

namespace assaygen::chem {

namespace {

using detail::aromatic_capable;
using detail::element_known;
using detail::organic_subset;

constexpr int kNoBond = 0;

struct OpenRing {
  int atom = -1;
  int order = kNoBond;  // explicit symbol on the opening side, if any
  int direction = 0;
};

struct ParseState {
  explicit ParseState(const std::string& t) : text(t) {}

  const std::string& text;
  std::size_t pos = 0;
  Molecule mol;
  std::vector<std::pair<int, std::size_t>> stack;  // branch return points
  int prev = -1;
  int pending_order = kNoBond;
  int pending_direction = 0;
  std::map<int, OpenRing> open_rings;
  bool atom_in_component = false;
};

[[noreturn]] void fail(const ParseState& st, const std::string& message) {
  throw SyntaxError(static_cast<int>(st.pos), message);
}

bool default_aromatic_bond(const Molecule& mol, int a, int b) {
  return mol.atoms[static_cast<std::size_t>(a)].aromatic &&
         mol.atoms[static_cast<std::size_t>(b)].aromatic;
}

void add_bond(ParseState& st, int a, int b, int order, int direction) {
  if (a == b) fail(st, "ring bond closes on its own atom");
  for (const Bond& bond : st.mol.bonds) {
    if ((bond.from == a && bond.to == b) || (bond.from == b && bond.to == a)) {
      fail(st, "duplicate bond between the same atoms");
    }
  }
  Bond bond;
  bond.from = a;
  bond.to = b;
  bond.direction = direction;
  if (order == kNoBond) {
    bond.order = default_aromatic_bond(st.mol, a, b) ? BondOrder::kAromatic
                                                     : BondOrder::kSingle;
  } else {
    bond.order = static_cast<BondOrder>(order);
  }
  st.mol.bonds.push_back(bond);
}

void attach_atom(ParseState& st, Atom atom) {
  st.mol.atoms.push_back(std::move(atom));
  int idx = static_cast<int>(st.mol.atoms.size()) - 1;
  if (st.prev >= 0) {
    add_bond(st, st.prev, idx, st.pending_order, st.pending_direction);
  } else if (st.pending_order != kNoBond || st.pending_direction != 0) {
    fail(st, "bond symbol with no preceding atom");
  }
  st.pending_order = kNoBond;
  st.pending_direction = 0;
  st.prev = idx;
  st.atom_in_component = true;
}

int parse_uint(ParseState& st, int max_digits) {
  int value = 0;
  int digits = 0;
  while (st.pos < st.text.size() && std::isdigit(
             static_cast<unsigned char>(st.text[st.pos])) &&
         digits < max_digits) {
    value = value * 10 + (st.text[st.pos] - '0');
    ++st.pos;
    ++digits;
  }
  return digits == 0 ? -1 : value;
}

void parse_bracket_atom(ParseState& st) {
  ++st.pos;  // consume '['
  Atom atom;
  atom.bracketed = true;
  int isotope = parse_uint(st, 3);
  if (isotope >= 0) atom.isotope = isotope;
  if (st.pos >= st.text.size()) fail(st, "unterminated bracket atom");

  char c = st.text[st.pos];
  if (c == '*') {
    atom.element = "*";
    ++st.pos;
  } else if (std::isupper(static_cast<unsigned char>(c))) {
    std::string symbol(1, c);
    ++st.pos;
    if (st.pos < st.text.size() &&
        std::islower(static_cast<unsigned char>(st.text[st.pos]))) {
      std::string two = symbol + st.text[st.pos];
      if (element_known(two)) {
        symbol = two;
        ++st.pos;
      }
    }
    if (!element_known(symbol)) fail(st, "unknown element '" + symbol + "'");
    atom.element = symbol;
  } else if (std::islower(static_cast<unsigned char>(c))) {
    std::string symbol(1, c);
    ++st.pos;
    if (st.pos < st.text.size() &&
        std::islower(static_cast<unsigned char>(st.text[st.pos]))) {
      std::string two = symbol + st.text[st.pos];
      if (two == "se" || two == "as" || two == "te") {
        symbol = two;
        ++st.pos;
      }
    }
    std::string upper = symbol;
    upper[0] = static_cast<char>(std::toupper(
        static_cast<unsigned char>(upper[0])));
    if (!aromatic_capable(upper)) {
      fail(st, "element cannot be aromatic: '" + symbol + "'");
    }
    atom.element = upper;
    atom.aromatic = true;
  } else {
    fail(st, "expected element symbol in bracket");
  }

  if (st.pos < st.text.size() && st.text[st.pos] == '@') {
    ++st.pos;
    if (st.pos < st.text.size() && st.text[st.pos] == '@') {
      atom.chirality = "@@";
      ++st.pos;
    } else {
      atom.chirality = "@";
    }
  }
  if (st.pos < st.text.size() && st.text[st.pos] == 'H') {
    ++st.pos;
    int count = parse_uint(st, 2);
    atom.hydrogens = count >= 0 ? count : 1;
  }
  if (st.pos < st.text.size() &&
      (st.text[st.pos] == '+' || st.text[st.pos] == '-')) {
    char sign_char = st.text[st.pos];
    int sign = sign_char == '+' ? 1 : -1;
    ++st.pos;
    int magnitude = parse_uint(st, 2);
    if (magnitude < 0) {
      magnitude = 1;
      while (st.pos < st.text.size() && st.text[st.pos] == sign_char) {
        ++magnitude;
        ++st.pos;
      }
    }
    if (magnitude > 15) fail(st, "charge magnitude out of range");
    atom.charge = sign * magnitude;
  }
  if (st.pos < st.text.size() && st.text[st.pos] == ':') {
    ++st.pos;
    int cls = parse_uint(st, 4);
    if (cls < 0) fail(st, "expected atom class digits after ':'");
    atom.atom_class = cls;
  }
  if (st.pos >= st.text.size() || st.text[st.pos] != ']') {
    fail(st, "expected ']'");
  }
  ++st.pos;
  attach_atom(st, std::move(atom));
}

void parse_organic_atom(ParseState& st) {
  char c = st.text[st.pos];
  Atom atom;
  if (c == '*') {
    atom.element = "*";
    ++st.pos;
  } else if (std::isupper(static_cast<unsigned char>(c))) {
    std::string symbol(1, c);
    ++st.pos;
    if ((c == 'C' || c == 'B') && st.pos < st.text.size() &&
        (st.text[st.pos] == 'l' || st.text[st.pos] == 'r')) {
      std::string two = symbol + st.text[st.pos];
      if (two == "Cl" || two == "Br") {
        symbol = two;
        ++st.pos;
      }
    }
    if (!organic_subset(symbol)) {
      fail(st, "element needs brackets: '" + symbol + "'");
    }
    atom.element = symbol;
  } else {
    std::string symbol(1, c);
    if (c != 'b' && c != 'c' && c != 'n' && c != 'o' && c != 'p' && c != 's') {
      fail(st, "unexpected character '" + symbol + "'");
    }
    ++st.pos;
    atom.element = std::string(1, static_cast<char>(std::toupper(
                                      static_cast<unsigned char>(c))));
    atom.aromatic = true;
  }
  attach_atom(st, std::move(atom));
}

void handle_ring_digit(ParseState& st, int digit) {
  if (st.prev < 0) fail(st, "ring closure with no preceding atom");
  auto it = st.open_rings.find(digit);
  if (it == st.open_rings.end()) {
    OpenRing open;
    open.atom = st.prev;
    open.order = st.pending_order;
    open.direction = st.pending_direction;
    st.open_rings[digit] = open;
  } else {
    OpenRing open = it->second;
    st.open_rings.erase(it);
    int order = st.pending_order;
    if (open.order != kNoBond && order != kNoBond && open.order != order) {
      fail(st, "conflicting bond orders on ring closure");
    }
    if (order == kNoBond) order = open.order;
    int direction = st.pending_direction != 0 ? st.pending_direction
                                              : open.direction;
    add_bond(st, open.atom, st.prev, order, direction);
  }
  st.pending_order = kNoBond;
  st.pending_direction = 0;
}

void assign_implicit_hydrogens(Molecule& mol) {
  auto adj = mol.adjacency();
  for (std::size_t ai = 0; ai < mol.atoms.size(); ++ai) {
    Atom& atom = mol.atoms[ai];
    if (atom.bracketed || atom.element == "*") continue;
    int n_aromatic = 0;
    int non_aromatic_sum = 0;
    for (const auto& [nbr, bi] : adj[ai]) {
      (void)nbr;
      BondOrder order = mol.bonds[static_cast<std::size_t>(bi)].order;
      if (order == BondOrder::kAromatic) {
        ++n_aromatic;
      } else {
        non_aromatic_sum += static_cast<int>(order);
      }
    }
    atom.hydrogens = detail::implied_hydrogens(atom.element, atom.aromatic,
                                               n_aromatic, non_aromatic_sum);
  }
}

}  // namespace

std::vector<std::vector<std::pair<int, int>>> Molecule::adjacency() const {
  std::vector<std::vector<std::pair<int, int>>> adj(atoms.size());
  for (std::size_t bi = 0; bi < bonds.size(); ++bi) {
    const Bond& bond = bonds[bi];
    adj[static_cast<std::size_t>(bond.from)].push_back(
        {bond.to, static_cast<int>(bi)});
    adj[static_cast<std::size_t>(bond.to)].push_back(
        {bond.from, static_cast<int>(bi)});
  }
  return adj;
}

Molecule parse_smiles(const std::string& text) {
  ParseState st(text);
  if (text.empty()) fail(st, "empty input");

  while (st.pos < text.size()) {
    char c = text[st.pos];
    if (c == '[') {
      parse_bracket_atom(st);
    } else if (c == '*' || std::isalpha(static_cast<unsigned char>(c))) {
      parse_organic_atom(st);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      ++st.pos;
      handle_ring_digit(st, c - '0');
    } else if (c == '%') {
      ++st.pos;
      if (st.pos + 1 >= text.size() ||
          !std::isdigit(static_cast<unsigned char>(text[st.pos])) ||
          !std::isdigit(static_cast<unsigned char>(text[st.pos + 1]))) {
        fail(st, "'%' needs two ring digits");
      }
      int digit = (text[st.pos] - '0') * 10 + (text[st.pos + 1] - '0');
      st.pos += 2;
      handle_ring_digit(st, digit);
    } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '/' ||
               c == '\\') {
      if (st.pending_order != kNoBond || st.pending_direction != 0) {
        fail(st, "two bond symbols in a row");
      }
      if (c == '-') {
        st.pending_order = 1;
      } else if (c == '=') {
        st.pending_order = 2;
      } else if (c == '#') {
        st.pending_order = 3;
      } else if (c == ':') {
        st.pending_order = 4;
      } else {
        st.pending_order = 1;
        st.pending_direction = c == '/' ? 1 : -1;
      }
      ++st.pos;
    } else if (c == '(') {
      if (st.prev < 0) fail(st, "branch with no preceding atom");
      if (st.pending_order != kNoBond) fail(st, "bond symbol before branch");
      if (!st.stack.empty() && st.stack.back().second == st.mol.atoms.size()) {
        fail(st, "branch must start with an atom");
      }
      st.stack.push_back({st.prev, st.mol.atoms.size()});
      ++st.pos;
    } else if (c == ')') {
      if (st.stack.empty()) throw UnmatchedParen();
      if (st.pending_order != kNoBond || st.pending_direction != 0) {
        fail(st, "dangling bond at branch close");
      }
      if (st.mol.atoms.size() == st.stack.back().second) {
        fail(st, "empty branch");
      }
      st.prev = st.stack.back().first;
      st.stack.pop_back();
      ++st.pos;
    } else if (c == '.') {
      if (!st.atom_in_component) fail(st, "dot with no preceding component");
      if (st.pending_order != kNoBond || st.pending_direction != 0) {
        fail(st, "dangling bond at dot");
      }
      if (!st.stack.empty()) fail(st, "dot inside branch");
      st.prev = -1;
      st.atom_in_component = false;
      ++st.pos;
    } else {
      fail(st, std::string("unexpected character '") + c + "'");
    }
  }

  if (!st.open_rings.empty()) throw UnclosedRing(st.open_rings.begin()->first);
  if (!st.stack.empty()) throw UnmatchedParen();
  if (st.pending_order != kNoBond || st.pending_direction != 0) {
    fail(st, "trailing bond symbol");
  }
  if (!st.atom_in_component) fail(st, "trailing dot");
  if (st.mol.atoms.empty()) fail(st, "no atoms");

  assign_implicit_hydrogens(st.mol);
  detail::check_valences(st.mol);

  int heavy = 0;
  for (const Atom& atom : st.mol.atoms) {
    if (atom.element != "H") ++heavy;
  }
  st.mol.heavy_atom_count = heavy;
  st.mol.canonical_smiles = canonicalize(st.mol);
  return st.mol;
}

}  // namespace assaygen::chem
