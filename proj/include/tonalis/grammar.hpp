#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "tonalis/numeral.hpp"

namespace tonalis {

/// Non-terminal inventory: the piece and the region symbols (tonic,
/// dominant, sub-dominant and their continuations), the local harmonic
/// functors t/s/d with their parallel/counter-parallel variants, and one
/// dX functor per scale degree.
enum class NonTerminal : int {
  Piece,
  TR,
  CTR,
  DR,
  CDR,
  SR,
  CSR,
  T,
  S,
  D,
  Tp,
  Dp,
  Sp,
  Tcp,
  DI,
  DII,
  DIII,
  DIV,
  DV,
  DVI,
  DVII,
};

constexpr int kNonTerminalCount = 21;

constexpr std::array<std::string_view, kNonTerminalCount> kNonTerminalNames = {
    "piece", "TR", "CTR", "DR",  "CDR", "SR",  "CSR",
    "t",     "s",  "d",   "tp",  "dp",  "sp",  "tcp",
    "dI",    "dII", "dIII", "dIV", "dV", "dVI", "dVII"};

constexpr std::string_view to_string(NonTerminal nt) {
  return kNonTerminalNames[static_cast<int>(nt)];
}

inline std::optional<NonTerminal> nonterminal_from_string(std::string_view text) {
  for (int i = 0; i < kNonTerminalCount; ++i)
    if (text == kNonTerminalNames[i]) return static_cast<NonTerminal>(i);
  return std::nullopt;
}

/// Either a non-terminal or a numeral terminal.
class Symbol {
 public:
  static constexpr Symbol nonterminal(NonTerminal nt) { return Symbol(false, nt); }
  static constexpr Symbol terminal(NumeralTerminal t) {
    Symbol s(true, NonTerminal::Piece);
    s.term_ = t;
    return s;
  }

  constexpr bool is_terminal() const { return terminal_; }
  constexpr NonTerminal as_nonterminal() const { return nt_; }
  constexpr NumeralTerminal as_terminal() const { return term_; }

  std::string name() const {
    return terminal_ ? term_.to_string() : std::string(to_string(nt_));
  }

  /// Non-terminal names win over terminal ones; the two sets are disjoint.
  static std::optional<Symbol> from_name(std::string_view text) {
    if (auto nt = nonterminal_from_string(text)) return nonterminal(*nt);
    if (auto t = NumeralTerminal::from_string(text)) return terminal(*t);
    return std::nullopt;
  }

  friend constexpr bool operator==(const Symbol& a, const Symbol& b) {
    if (a.terminal_ != b.terminal_) return false;
    return a.terminal_ ? a.term_ == b.term_ : a.nt_ == b.nt_;
  }

 private:
  constexpr Symbol(bool terminal, NonTerminal nt)
      : terminal_(terminal), nt_(nt), term_(NumeralTerminal::of(Degree::I)) {}
  bool terminal_;
  NonTerminal nt_;
  NumeralTerminal term_;
};

struct Production {
  NonTerminal lhs;
  std::vector<Symbol> rhs;  // 1 to 3 symbols

  friend bool operator==(const Production&, const Production&) = default;
};

struct EmptyInput : std::runtime_error {
  EmptyInput() : std::runtime_error("cannot parse an empty terminal sequence") {}
};

/// An immutable context-free grammar over numeral terminals. The listed
/// production order defines the preference used to pick canonical trees.
class Grammar {
 public:
  explicit Grammar(std::vector<Production> productions)
      : productions_(std::move(productions)) {
    for (std::size_t i = 0; i < productions_.size(); ++i) {
      const Production& p = productions_[i];
      if (p.rhs.empty() || p.rhs.size() > 3)
        throw std::invalid_argument("production bodies must have 1 to 3 symbols");
      by_lhs_[static_cast<int>(p.lhs)].push_back(static_cast<int>(i));
    }
    compute_unit_order();
  }

  const std::vector<Production>& productions() const { return productions_; }

  const std::vector<int>& productions_of(NonTerminal nt) const {
    return by_lhs_[static_cast<int>(nt)];
  }

  /// Non-terminals ordered so that the target of every unit production
  /// comes before its source; per-span unit closure follows this order.
  const std::vector<NonTerminal>& unit_order() const { return unit_order_; }

  bool contains(const Production& p) const {
    return std::find(productions_.begin(), productions_.end(), p) !=
           productions_.end();
  }

  /// Parses rule lines of the form "CTR -> DR t | t".
  static std::vector<Production> parse_rules(std::span<const std::string_view> lines) {
    std::vector<Production> out;
    for (std::string_view line : lines) {
      auto arrow = line.find("->");
      if (arrow == std::string_view::npos)
        throw std::invalid_argument("rule without '->': " + std::string(line));
      auto lhs_name = trim(line.substr(0, arrow));
      auto lhs = nonterminal_from_string(lhs_name);
      if (!lhs)
        throw std::invalid_argument("unknown non-terminal: " + std::string(lhs_name));
      std::string_view body = line.substr(arrow + 2);
      while (!body.empty()) {
        auto bar = body.find('|');
        std::string_view alt =
            bar == std::string_view::npos ? body : body.substr(0, bar);
        body = bar == std::string_view::npos ? std::string_view{}
                                             : body.substr(bar + 1);
        Production p{*lhs, {}};
        for (std::string_view tok : split_words(alt)) {
          auto sym = Symbol::from_name(tok);
          if (!sym)
            throw std::invalid_argument("unknown symbol: " + std::string(tok));
          p.rhs.push_back(*sym);
        }
        if (p.rhs.empty())
          throw std::invalid_argument("empty alternative in: " + std::string(line));
        out.push_back(std::move(p));
      }
    }
    return out;
  }

  /// The tonal-harmony grammar. Productions appear in listed order; the
  /// descending-fifths rules (dX -> dY X along the circle of fifths) are
  /// deliberately absent because they make the grammar ambiguous.
  static std::vector<Production> tonal_harmony_rules() {
    static constexpr std::string_view kRules[] = {
        "piece -> TR",
        "TR -> CTR | CTR TR | CTR DR",
        "CTR -> DR t | t",
        "DR -> CDR | CDR DR",
        "CDR -> SR d | d",
        "SR -> CSR | CSR SR",
        "CSR -> s",
        "t -> tp | tcp dI | dI dV dI | dI",
        "s -> sp | dIV",
        "d -> dp | dV",
        "tp -> dVI",
        "dp -> dVII",
        "sp -> dII | bII",
        "tcp -> dIII",
        "dI -> V^III I | V^V I",
        "dII -> V^II II | VII^II II | V^IV V^II II",
        "dIII -> V^III III | V^V III | VII^III III | VII^V III",
        "dIV -> V^IV IV | V^VI IV | VII^IV IV | VII^VI IV | V^V V^IV IV",
        "dV -> V^V V | V^II V | VII^V V | VII^II V",
        "dVI -> V^VI VI | VII^VI VI",
        "dVII -> V^VII VII | VII^VII VII",
        "dI -> I",
        "dII -> II",
        "dIII -> III",
        "dIV -> IV",
        "dV -> V",
        "dVI -> VI",
        "dVII -> VII",
    };
    return parse_rules(kRules);
  }

  static const Grammar& tonal_harmony() {
    static const Grammar g(tonal_harmony_rules());
    return g;
  }

 private:
  static std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
  }

  static std::vector<std::string_view> split_words(std::string_view s) {
    std::vector<std::string_view> words;
    std::size_t i = 0;
    while (i < s.size()) {
      while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
      if (j > i) words.push_back(s.substr(i, j - i));
      i = j;
    }
    return words;
  }

  void compute_unit_order() {
    // Kahn's algorithm over the unit-production dependency graph.
    std::array<int, kNonTerminalCount> pending{};
    std::array<std::vector<int>, kNonTerminalCount> dependants{};
    for (const Production& p : productions_) {
      if (p.rhs.size() == 1 && !p.rhs[0].is_terminal()) {
        int src = static_cast<int>(p.lhs);
        int dst = static_cast<int>(p.rhs[0].as_nonterminal());
        ++pending[src];
        dependants[dst].push_back(src);
      }
    }
    std::vector<int> ready;
    for (int i = 0; i < kNonTerminalCount; ++i)
      if (pending[i] == 0) ready.push_back(i);
    while (!ready.empty()) {
      int nt = ready.back();
      ready.pop_back();
      unit_order_.push_back(static_cast<NonTerminal>(nt));
      for (int dep : dependants[nt])
        if (--pending[dep] == 0) ready.push_back(dep);
    }
    if (unit_order_.size() != kNonTerminalCount)
      throw std::invalid_argument("grammar has a unit-production cycle");
  }

  std::vector<Production> productions_;
  std::array<std::vector<int>, kNonTerminalCount> by_lhs_{};
  std::vector<NonTerminal> unit_order_;
};

/// A derivation node. Terminal leaves have no children; every internal
/// node corresponds to one grammar production.
struct ParseTree {
  Symbol symbol;
  std::vector<ParseTree> children;

  friend bool operator==(const ParseTree& a, const ParseTree& b) {
    return a.symbol == b.symbol && a.children == b.children;
  }
};

struct ParseOptions {
  /// Tree counting saturates here; 1 vs. more is what matters.
  std::uint64_t count_cap = 64;
};

struct ParseResult {
  /// Number of distinct parse trees, saturated at the configured cap.
  std::uint64_t trees_found = 0;
  /// True when the count hit the cap, i.e. read trees_found as ">= cap".
  bool capped = false;
  /// Deterministic preferred tree, present whenever trees_found >= 1.
  std::optional<ParseTree> canonical;
  /// Longest k such that the first k terminals can begin a sentence of the
  /// grammar. Equals the input length on success; on failure it points at
  /// the first offending position.
  int viable_prefix = 0;

  friend bool operator==(const ParseResult&, const ParseResult&) = default;
};

inline std::vector<NumeralTerminal> yield_of(const ParseTree& tree) {
  std::vector<NumeralTerminal> out;
  auto walk = [&out](const ParseTree& node, auto&& self) -> void {
    if (node.symbol.is_terminal()) {
      out.push_back(node.symbol.as_terminal());
      return;
    }
    for (const ParseTree& child : node.children) self(child, self);
  };
  walk(tree, walk);
  return out;
}

/// Bracketed text form, e.g. "(t (dI I))". Leaves print bare.
inline std::string to_bracketed(const ParseTree& tree) {
  if (tree.symbol.is_terminal()) return tree.symbol.name();
  std::string out = "(" + tree.symbol.name();
  for (const ParseTree& child : tree.children) {
    out += ' ';
    out += to_bracketed(child);
  }
  out += ')';
  return out;
}

inline std::optional<ParseTree> from_bracketed(std::string_view text) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\n') {
      ++i;
    } else if (c == '(' || c == ')') {
      tokens.push_back(text.substr(i, 1));
      ++i;
    } else {
      std::size_t j = i;
      while (j < text.size() && text[j] != ' ' && text[j] != '\t' &&
             text[j] != '\n' && text[j] != '(' && text[j] != ')')
        ++j;
      tokens.push_back(text.substr(i, j - i));
      i = j;
    }
  }

  std::size_t pos = 0;
  auto parse_node = [&](auto&& self) -> std::optional<ParseTree> {
    if (pos >= tokens.size()) return std::nullopt;
    if (tokens[pos] == ")") return std::nullopt;
    if (tokens[pos] == "(") {
      ++pos;
      if (pos >= tokens.size()) return std::nullopt;
      auto nt = nonterminal_from_string(tokens[pos]);
      if (!nt) return std::nullopt;
      ++pos;
      ParseTree node{Symbol::nonterminal(*nt), {}};
      while (pos < tokens.size() && tokens[pos] != ")") {
        auto child = self(self);
        if (!child) return std::nullopt;
        node.children.push_back(std::move(*child));
      }
      if (pos >= tokens.size() || node.children.empty()) return std::nullopt;
      ++pos;  // closing paren
      return node;
    }
    auto term = NumeralTerminal::from_string(tokens[pos]);
    if (!term) return std::nullopt;
    ++pos;
    return ParseTree{Symbol::terminal(*term), {}};
  };
  auto tree = parse_node(parse_node);
  if (!tree || pos != tokens.size()) return std::nullopt;
  return tree;
}

/// DOT rendering of one tree; node labels are the symbol names.
inline std::string to_dot(const ParseTree& tree,
                          std::string_view graph_name = "parse_tree") {
  std::ostringstream os;
  os << "digraph " << graph_name << " {\n  node [shape=none];\n";
  int next_id = 0;
  auto emit = [&](const ParseTree& node, auto&& self) -> int {
    int id = next_id++;
    os << "  n" << id << " [label=\"" << node.symbol.name() << "\"];\n";
    for (const ParseTree& child : node.children) {
      int child_id = self(child, self);
      os << "  n" << id << " -> n" << child_id << ";\n";
    }
    return id;
  };
  emit(tree, emit);
  os << "}\n";
  return os.str();
}

namespace detail {

constexpr std::uint64_t kCountCapLimit = std::uint64_t{1} << 31;

/// Span-indexed derivation counts for every non-terminal, saturated at the
/// cap so that "count == cap" reads as "cap or more".
class Chart {
 public:
  Chart(const Grammar& grammar, std::span<const NumeralTerminal> input,
        std::uint64_t cap)
      : grammar_(grammar),
        input_(input),
        n_(static_cast<int>(input.size())),
        cap_(std::clamp<std::uint64_t>(cap, 1, kCountCapLimit)) {
    counts_.assign(static_cast<std::size_t>(n_) * (n_ + 1) / 2 * kNonTerminalCount,
                   0);
    build();
  }

  std::uint64_t cap() const { return cap_; }

  std::uint64_t count(NonTerminal nt, int start, int len) const {
    return counts_[cell(start, len) * kNonTerminalCount + static_cast<int>(nt)];
  }

  /// Canonical derivation of (nt, span): productions are tried in listed
  /// order and splits prefer the longest leftmost constituent.
  ParseTree extract(NonTerminal nt, int start, int len) const {
    for (int pid : grammar_.productions_of(nt)) {
      const Production& p = grammar_.productions()[pid];
      const auto& rhs = p.rhs;
      if (rhs.size() == 1) {
        if (!part_count(rhs[0], start, len)) continue;
        return ParseTree{Symbol::nonterminal(nt), {extract_part(rhs[0], start, len)}};
      }
      if (rhs.size() == 2) {
        for (int len1 = len - 1; len1 >= 1; --len1) {
          if (!part_count(rhs[0], start, len1)) continue;
          if (!part_count(rhs[1], start + len1, len - len1)) continue;
          return ParseTree{Symbol::nonterminal(nt),
                           {extract_part(rhs[0], start, len1),
                            extract_part(rhs[1], start + len1, len - len1)}};
        }
        continue;
      }
      for (int len1 = len - 2; len1 >= 1; --len1) {
        if (!part_count(rhs[0], start, len1)) continue;
        for (int len2 = len - len1 - 1; len2 >= 1; --len2) {
          if (!part_count(rhs[1], start + len1, len2)) continue;
          if (!part_count(rhs[2], start + len1 + len2, len - len1 - len2)) continue;
          return ParseTree{
              Symbol::nonterminal(nt),
              {extract_part(rhs[0], start, len1),
               extract_part(rhs[1], start + len1, len2),
               extract_part(rhs[2], start + len1 + len2, len - len1 - len2)}};
        }
      }
    }
    throw std::logic_error("extract called on a span with no derivation");
  }

 private:
  std::size_t cell(int start, int len) const {
    // Rows grouped by length: row len-1 holds n-len+1 spans.
    std::size_t row_offset =
        static_cast<std::size_t>(len - 1) * n_ -
        static_cast<std::size_t>(len - 1) * (len - 2) / 2;
    return row_offset + start;
  }

  std::uint64_t& slot(NonTerminal nt, int start, int len) {
    return counts_[cell(start, len) * kNonTerminalCount + static_cast<int>(nt)];
  }

  std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) const {
    return std::min(a + b, cap_);
  }
  std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) const {
    if (a == 0 || b == 0) return 0;
    return std::min(a * b, cap_);
  }

  std::uint64_t part_count(const Symbol& sym, int start, int len) const {
    if (sym.is_terminal())
      return len == 1 && input_[start] == sym.as_terminal() ? 1 : 0;
    return count(sym.as_nonterminal(), start, len);
  }

  void build() {
    for (int len = 1; len <= n_; ++len) {
      for (int start = 0; start + len <= n_; ++start) {
        for (const Production& p : grammar_.productions()) {
          const auto& rhs = p.rhs;
          std::uint64_t ways = 0;
          if (rhs.size() == 1) {
            if (!rhs[0].is_terminal()) continue;  // unit closure below
            ways = part_count(rhs[0], start, len);
          } else if (rhs.size() == 2) {
            for (int len1 = 1; len1 < len; ++len1) {
              std::uint64_t a = part_count(rhs[0], start, len1);
              if (!a) continue;
              ways = sat_add(ways,
                             sat_mul(a, part_count(rhs[1], start + len1, len - len1)));
            }
          } else {
            for (int len1 = 1; len1 + 1 < len; ++len1) {
              std::uint64_t a = part_count(rhs[0], start, len1);
              if (!a) continue;
              for (int len2 = 1; len1 + len2 < len; ++len2) {
                std::uint64_t b = part_count(rhs[1], start + len1, len2);
                if (!b) continue;
                ways = sat_add(
                    ways, sat_mul(sat_mul(a, b),
                                  part_count(rhs[2], start + len1 + len2,
                                             len - len1 - len2)));
              }
            }
          }
          if (ways) {
            auto& s = slot(p.lhs, start, len);
            s = sat_add(s, ways);
          }
        }
        for (NonTerminal nt : grammar_.unit_order()) {
          for (int pid : grammar_.productions_of(nt)) {
            const Production& p = grammar_.productions()[pid];
            if (p.rhs.size() != 1 || p.rhs[0].is_terminal()) continue;
            std::uint64_t child = count(p.rhs[0].as_nonterminal(), start, len);
            if (child) {
              auto& s = slot(nt, start, len);
              s = sat_add(s, child);
            }
          }
        }
      }
    }
  }

  ParseTree extract_part(const Symbol& sym, int start, int len) const {
    if (sym.is_terminal()) return ParseTree{sym, {}};
    return extract(sym.as_nonterminal(), start, len);
  }

  const Grammar& grammar_;
  std::span<const NumeralTerminal> input_;
  int n_;
  std::uint64_t cap_;
  std::vector<std::uint64_t> counts_;
};

struct EarleyItem {
  int prod;
  int dot;
  int origin;
  friend bool operator==(const EarleyItem&, const EarleyItem&) = default;
};

struct EarleyItemHash {
  std::size_t operator()(const EarleyItem& it) const {
    return (static_cast<std::size_t>(it.prod) * 131 + it.dot) * 131 + it.origin;
  }
};

/// Earley-style recognizer used only for diagnostics: how far into the
/// input does some sentence of the grammar still exist?
inline int viable_prefix_length(const Grammar& g,
                                std::span<const NumeralTerminal> input) {
  using Item = EarleyItem;
  const auto& prods = g.productions();
  const int n = static_cast<int>(input.size());
  std::vector<std::vector<Item>> sets(n + 1);
  std::vector<std::unordered_set<Item, EarleyItemHash>> seen(n + 1);

  auto add = [&](int pos, Item item) {
    if (seen[pos].insert(item).second) sets[pos].push_back(item);
  };
  for (int pid : g.productions_of(NonTerminal::Piece)) add(0, Item{pid, 0, 0});

  int reached = 0;
  for (int pos = 0; pos <= n; ++pos) {
    if (sets[pos].empty()) break;
    reached = pos;
    for (std::size_t i = 0; i < sets[pos].size(); ++i) {
      Item item = sets[pos][i];
      const Production& p = prods[item.prod];
      if (item.dot == static_cast<int>(p.rhs.size())) {
        // complete: advance every caller waiting on p.lhs
        for (const Item& parent : sets[item.origin]) {
          const Production& pp = prods[parent.prod];
          if (parent.dot < static_cast<int>(pp.rhs.size()) &&
              !pp.rhs[parent.dot].is_terminal() &&
              pp.rhs[parent.dot].as_nonterminal() == p.lhs)
            add(pos, Item{parent.prod, parent.dot + 1, parent.origin});
        }
        continue;
      }
      const Symbol& next = p.rhs[item.dot];
      if (next.is_terminal()) {
        if (pos < n && input[pos] == next.as_terminal())
          add(pos + 1, Item{item.prod, item.dot + 1, item.origin});
      } else {
        for (int pid : g.productions_of(next.as_nonterminal()))
          add(pos, Item{pid, 0, pos});
      }
    }
  }
  return reached;
}

}  // namespace detail

/// Chart-parses the terminal sequence from the start symbol, counting
/// distinct trees up to the cap and extracting the canonical one.
inline ParseResult parse(const Grammar& grammar,
                         std::span<const NumeralTerminal> terminals,
                         const ParseOptions& options = {}) {
  if (terminals.empty()) throw EmptyInput();
  const int n = static_cast<int>(terminals.size());
  detail::Chart chart(grammar, terminals, options.count_cap);

  ParseResult result;
  result.trees_found = chart.count(NonTerminal::Piece, 0, n);
  result.capped = result.trees_found >= chart.cap();
  if (result.trees_found > 0) {
    result.canonical = chart.extract(NonTerminal::Piece, 0, n);
    result.viable_prefix = n;
  } else {
    result.viable_prefix = detail::viable_prefix_length(grammar, terminals);
  }
  return result;
}

}  // namespace tonalis
