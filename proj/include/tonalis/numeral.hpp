#pragma once

#include <array>
#include <compare>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tonalis/modulation.hpp"
#include "tonalis/pitch.hpp"

namespace tonalis {

enum class Degree : int { I = 1, II, III, IV, V, VI, VII };

constexpr std::array<std::string_view, 7> kDegreeNames = {"I",  "II", "III", "IV",
                                                          "V",  "VI", "VII"};

constexpr std::string_view to_string(Degree d) {
  return kDegreeNames[static_cast<int>(d) - 1];
}

inline std::optional<Degree> degree_from_string(std::string_view text) {
  for (int i = 0; i < 7; ++i)
    if (text == kDegreeNames[i]) return static_cast<Degree>(i + 1);
  return std::nullopt;
}

/// A terminal of the harmony grammar: a plain scale degree, the Neapolitan
/// bII, a secondary dominant V^X, or a secondary leading-tone chord VII^X.
/// Secondary targets exclude I (the dominant of I is just V).
class NumeralTerminal {
 public:
  enum class Kind { Degree, FlatTwo, SecondaryDominant, SecondaryLeadingTone };

  static constexpr NumeralTerminal of(Degree d) {
    return NumeralTerminal(Kind::Degree, d);
  }
  static constexpr NumeralTerminal flat_two() {
    return NumeralTerminal(Kind::FlatTwo, Degree::II);
  }
  static constexpr NumeralTerminal secondary_dominant(Degree target) {
    return NumeralTerminal(Kind::SecondaryDominant, checked_target(target));
  }
  static constexpr NumeralTerminal secondary_leading_tone(Degree target) {
    return NumeralTerminal(Kind::SecondaryLeadingTone, checked_target(target));
  }

  constexpr Kind kind() const { return kind_; }
  constexpr Degree degree() const { return degree_; }

  /// Dense 0..19 index: 7 degrees, bII, 6 V^X, 6 VII^X.
  constexpr int index() const {
    switch (kind_) {
      case Kind::Degree: return static_cast<int>(degree_) - 1;
      case Kind::FlatTwo: return 7;
      case Kind::SecondaryDominant: return 8 + static_cast<int>(degree_) - 2;
      case Kind::SecondaryLeadingTone: return 14 + static_cast<int>(degree_) - 2;
    }
    return 0;
  }
  static constexpr int kIndexCount = 20;

  std::string to_string() const {
    switch (kind_) {
      case Kind::Degree: return std::string(tonalis::to_string(degree_));
      case Kind::FlatTwo: return "bII";
      case Kind::SecondaryDominant:
        return "V^" + std::string(tonalis::to_string(degree_));
      case Kind::SecondaryLeadingTone:
        return "VII^" + std::string(tonalis::to_string(degree_));
    }
    return {};
  }

  static std::optional<NumeralTerminal> from_string(std::string_view text) {
    if (text == "bII") return flat_two();
    if (auto caret = text.find('^'); caret != std::string_view::npos) {
      auto head = text.substr(0, caret);
      auto target = degree_from_string(text.substr(caret + 1));
      if (!target || *target == Degree::I) return std::nullopt;
      if (head == "V") return secondary_dominant(*target);
      if (head == "VII") return secondary_leading_tone(*target);
      return std::nullopt;
    }
    if (auto d = degree_from_string(text)) return of(*d);
    return std::nullopt;
  }

  friend constexpr auto operator<=>(NumeralTerminal, NumeralTerminal) = default;

 private:
  constexpr NumeralTerminal(Kind k, Degree d) : kind_(k), degree_(d) {}
  static constexpr Degree checked_target(Degree d) {
    return d == Degree::I
               ? throw std::invalid_argument("secondary chords cannot target I")
               : d;
  }
  Kind kind_;
  Degree degree_;
};

struct UnmappableChord : std::runtime_error {
  UnmappableChord(Chord c, Key k, int chord_index = 0)
      : std::runtime_error("chord '" + c.spelling + "' has no numeral in the key of " +
                           std::string(k.name()) +
                           (chord_index > 0 ? " (chord " + std::to_string(chord_index) + ")"
                                            : "")),
        chord(std::move(c)),
        key(k),
        index(chord_index) {}
  Chord chord;
  Key key;
  int index;
};

namespace detail {

/// Correspondence table in key-of-C form, indexed by (root offset from the
/// tonic, quality). Alongside the diatonic degrees of both modes it covers
/// the secondary dominants, the secondary leading-tone chords a semitone
/// below their target, and the Neapolitan bII. Blank slots have no reading
/// and make assign_numeral throw.
inline const std::array<std::optional<NumeralTerminal>, 48>& numeral_map() {
  using NT = NumeralTerminal;
  static const auto table = [] {
    std::array<std::optional<NT>, 48> t{};
    auto set = [&t](int offset, ChordQuality q, NT value) {
      t[offset * 4 + quality_index(q)] = value;
    };
    constexpr auto Maj = ChordQuality::Major;
    constexpr auto Min = ChordQuality::Minor;
    constexpr auto Dom = ChordQuality::Dominant7;
    constexpr auto Dim = ChordQuality::Diminished;

    set(0, Maj, NT::of(Degree::I));
    set(0, Min, NT::of(Degree::I));
    set(0, Dom, NT::secondary_dominant(Degree::IV));
    set(1, Maj, NT::flat_two());
    set(2, Min, NT::of(Degree::II));
    set(2, Dim, NT::of(Degree::II));
    set(2, Maj, NT::secondary_dominant(Degree::V));
    set(2, Dom, NT::secondary_dominant(Degree::V));
    set(3, Maj, NT::of(Degree::III));
    set(3, Dom, NT::secondary_dominant(Degree::VI));
    set(4, Min, NT::of(Degree::III));
    set(4, Maj, NT::secondary_dominant(Degree::VI));
    set(4, Dom, NT::secondary_dominant(Degree::VI));
    set(5, Maj, NT::of(Degree::IV));
    set(5, Min, NT::of(Degree::IV));
    set(5, Dom, NT::secondary_dominant(Degree::VII));
    set(7, Maj, NT::of(Degree::V));
    set(7, Dom, NT::of(Degree::V));
    set(7, Min, NT::of(Degree::V));
    set(8, Maj, NT::of(Degree::VI));
    set(9, Min, NT::of(Degree::VI));
    set(9, Maj, NT::secondary_dominant(Degree::II));
    set(9, Dom, NT::secondary_dominant(Degree::II));
    set(10, Maj, NT::of(Degree::VII));
    set(10, Dom, NT::secondary_dominant(Degree::III));
    set(11, Dim, NT::of(Degree::VII));
    set(11, Maj, NT::secondary_dominant(Degree::III));
    set(11, Dom, NT::secondary_dominant(Degree::III));
    // diminished chords a semitone below their resolution degree
    set(1, Dim, NT::secondary_leading_tone(Degree::II));
    set(3, Dim, NT::secondary_leading_tone(Degree::III));
    set(4, Dim, NT::secondary_leading_tone(Degree::IV));
    set(6, Dim, NT::secondary_leading_tone(Degree::V));
    set(8, Dim, NT::secondary_leading_tone(Degree::VI));
    set(10, Dim, NT::secondary_leading_tone(Degree::VII));
    return t;
  }();
  return table;
}

}  // namespace detail

inline bool is_mappable(const Chord& c, Key key) {
  int offset = c.root.shifted(-key.tonic().value()).value();
  return detail::numeral_map()[offset * 4 + quality_index(c.quality)].has_value();
}

/// Maps a chord to its numeral terminal relative to a key.
inline NumeralTerminal assign_numeral(const Chord& c, Key key) {
  int offset = c.root.shifted(-key.tonic().value()).value();
  const auto& entry = detail::numeral_map()[offset * 4 + quality_index(c.quality)];
  if (!entry) throw UnmappableChord(c, key);
  return *entry;
}

/// Numerals for one segment of a piece, pivot chord included on both sides.
inline std::vector<NumeralTerminal> assign_segment(std::span<const Chord> piece,
                                                   const Segment& seg) {
  std::vector<NumeralTerminal> out;
  out.reserve(seg.last >= seg.first ? seg.last - seg.first + 1 : 0);
  for (int i = seg.first; i <= seg.last; ++i) {
    const Chord& c = piece[i - 1];
    if (!is_mappable(c, seg.key)) throw UnmappableChord(c, seg.key, i);
    out.push_back(assign_numeral(c, seg.key));
  }
  return out;
}

}  // namespace tonalis
