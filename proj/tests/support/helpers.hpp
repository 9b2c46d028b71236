#pragma once

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <tonalis/tonalis.hpp>

namespace tonalis::testing {

inline std::vector<Chord> chords_of(const std::string& text) {
  std::istringstream in(text);
  std::string token;
  std::vector<Chord> out;
  while (in >> token) out.push_back(parse_chord(token));
  return out;
}

inline std::vector<NumeralTerminal> numerals_of(const std::string& text) {
  std::istringstream in(text);
  std::string token;
  std::vector<NumeralTerminal> out;
  while (in >> token) {
    auto n = NumeralTerminal::from_string(token);
    if (!n) throw std::runtime_error("bad numeral in test fixture: " + token);
    out.push_back(*n);
  }
  return out;
}

inline std::string numerals_text(const std::vector<NumeralTerminal>& numerals) {
  std::string out;
  for (const auto& n : numerals) {
    if (!out.empty()) out += ' ';
    out += n.to_string();
  }
  return out;
}

inline Key key_of(const std::string& name) {
  auto k = Key::from_name(name);
  if (!k) throw std::runtime_error("bad key in test fixture: " + name);
  return *k;
}

inline Chord random_chord(std::mt19937& rng) {
  std::uniform_int_distribution<int> root(0, 11);
  std::uniform_int_distribution<int> quality(0, 3);
  return make_chord(PitchClass(root(rng)), static_cast<ChordQuality>(quality(rng)));
}

inline std::vector<Chord> random_sequence(std::mt19937& rng, int min_len,
                                          int max_len) {
  std::uniform_int_distribution<int> len(min_len, max_len);
  std::vector<Chord> out;
  int n = len(rng);
  out.reserve(n);
  for (int i = 0; i < n; ++i) out.push_back(random_chord(rng));
  return out;
}

inline std::vector<Chord> transposed(const std::vector<Chord>& seq, int semitones) {
  std::vector<Chord> out;
  out.reserve(seq.size());
  for (const Chord& c : seq) out.push_back(transpose_chord(c, semitones));
  return out;
}

/// True when some window's dominant had to be resolved by the fifths-row
/// fallback, i.e. a tied maximum not involving the previous dominant. The
/// fallback order is not shift-invariant, so equivariance checks skip such
/// sequences.
inline bool row_order_tiebreak_fired(const std::vector<WindowScore>& windows) {
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& totals = windows[i].evidence.totals();
    int best = *std::max_element(totals.begin(), totals.end());
    if (i > 0 && windows[i - 1].dominant == windows[i].dominant &&
        windows[i].evidence.total_for(windows[i].dominant) == best)
      continue;  // hysteresis kept the previous key
    int at_max = 0;
    for (int t : totals) at_max += t == best;
    if (at_max > 1) return true;
  }
  return false;
}

/// Structural check that every internal node of a tree applies a production
/// of the grammar.
inline bool well_formed(const ParseTree& tree, const Grammar& grammar) {
  if (tree.symbol.is_terminal()) return tree.children.empty();
  Production applied{tree.symbol.as_nonterminal(), {}};
  for (const ParseTree& child : tree.children) applied.rhs.push_back(child.symbol);
  if (!grammar.contains(applied)) return false;
  for (const ParseTree& child : tree.children)
    if (!well_formed(child, grammar)) return false;
  return true;
}

/// The descending-fifths expansions (each degree prefixed by the degree a
/// fifth above it). Kept out of the shipping grammar: adding them makes
/// parses ambiguous.
inline std::vector<Production> descending_fifths_rules() {
  static constexpr std::string_view kRules[] = {
      "dI -> dV I",   "dII -> dVI II",  "dIII -> dVII III", "dIV -> dI IV",
      "dV -> dII V",  "dVI -> dIII VI", "dVII -> dIV VII"};
  return Grammar::parse_rules(kRules);
}

inline Grammar grammar_with_descending_fifths() {
  auto rules = Grammar::tonal_harmony_rules();
  auto extra = descending_fifths_rules();
  rules.insert(rules.end(), extra.begin(), extra.end());
  return Grammar(std::move(rules));
}

}  // namespace tonalis::testing
