#pragma once

#include <array>
#include <compare>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace tonalis {

/// A pitch class on the chromatic circle, 0 = C through 11 = B.
/// Always stored reduced mod 12; enharmonic spellings collapse here.
class PitchClass {
 public:
  constexpr PitchClass() = default;
  constexpr explicit PitchClass(int semitones) : value_(reduce(semitones)) {}

  constexpr int value() const { return value_; }
  constexpr PitchClass shifted(int semitones) const {
    return PitchClass(value_ + semitones);
  }

  friend constexpr auto operator<=>(PitchClass, PitchClass) = default;

 private:
  static constexpr int reduce(int s) {
    int r = s % 12;
    return r < 0 ? r + 12 : r;
  }
  int value_ = 0;
};

enum class ChordQuality { Major, Minor, Dominant7, Diminished };

constexpr int quality_index(ChordQuality q) { return static_cast<int>(q); }

constexpr std::string_view quality_suffix(ChordQuality q) {
  switch (q) {
    case ChordQuality::Major: return "";
    case ChordQuality::Minor: return "m";
    case ChordQuality::Dominant7: return "7";
    case ChordQuality::Diminished: return "o";
  }
  return "";
}

/// Canonical note spellings: sharps for F#/C#, flats for Ab/Eb/Bb/Db.
constexpr std::array<std::string_view, 12> kNoteNames = {
    "C", "Db", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};

constexpr std::string_view note_name(PitchClass pc) {
  return kNoteNames[static_cast<std::size_t>(pc.value())];
}

struct MalformedChord : std::runtime_error {
  explicit MalformedChord(std::string tok, int line_no = 0, int column_no = 0)
      : std::runtime_error("malformed chord token '" + tok + "'" +
                           (line_no > 0 ? " at line " + std::to_string(line_no) +
                                              ", column " + std::to_string(column_no)
                                        : "")),
        token(std::move(tok)),
        line(line_no),
        column(column_no) {}
  std::string token;
  int line;
  int column;
};

/// A chord symbol. Equality is (root, quality) only; the spelling is kept
/// verbatim for display, so C# and Db compare equal but print differently.
struct Chord {
  PitchClass root;
  ChordQuality quality = ChordQuality::Major;
  std::string spelling;

  friend bool operator==(const Chord& a, const Chord& b) {
    return a.root == b.root && a.quality == b.quality;
  }
};

inline std::string canonical_spelling(PitchClass root, ChordQuality q) {
  return std::string(note_name(root)) + std::string(quality_suffix(q));
}

inline Chord make_chord(PitchClass root, ChordQuality q) {
  return Chord{root, q, canonical_spelling(root, q)};
}

namespace detail {

inline std::optional<int> root_semitone(char letter) {
  switch (letter) {
    case 'C': return 0;
    case 'D': return 2;
    case 'E': return 4;
    case 'F': return 5;
    case 'G': return 7;
    case 'A': return 9;
    case 'B': return 11;
    default: return std::nullopt;
  }
}

/// Splits off the root letter plus an optional single accidental and returns
/// the pitch class and the remaining suffix, or nullopt for a bad root.
inline std::optional<std::pair<PitchClass, std::string_view>> parse_root(
    std::string_view token) {
  if (token.empty()) return std::nullopt;
  auto base = root_semitone(token[0]);
  if (!base) return std::nullopt;
  int semis = *base;
  std::string_view rest = token.substr(1);
  if (!rest.empty() && (rest[0] == '#' || rest[0] == 'b')) {
    semis += rest[0] == '#' ? 1 : -1;
    rest = rest.substr(1);
  }
  return std::make_pair(PitchClass(semis), rest);
}

inline std::optional<ChordQuality> parse_quality(std::string_view suffix) {
  if (suffix.empty()) return ChordQuality::Major;
  if (suffix == "m") return ChordQuality::Minor;
  if (suffix == "7") return ChordQuality::Dominant7;
  if (suffix == "o" || suffix == "dim" || suffix == "°")
    return ChordQuality::Diminished;
  return std::nullopt;
}

}  // namespace detail

/// Parses a chord token: root letter A-G, optional '#'/'b', optional quality
/// suffix of "" (major), "m", "7", or "o"/"dim"/"°". Anything else (double
/// accidentals, jazz qualities like m7) is rejected.
inline Chord parse_chord(std::string_view token) {
  auto root = detail::parse_root(token);
  if (!root) throw MalformedChord(std::string(token));
  auto quality = detail::parse_quality(root->second);
  if (!quality) throw MalformedChord(std::string(token));
  return Chord{root->first, *quality, std::string(token)};
}

/// Shifts the root mod 12, keeps the quality, and respells canonically.
inline Chord transpose_chord(const Chord& c, int semitones) {
  return make_chord(c.root.shifted(semitones), c.quality);
}

/// One of the 12 tonalities. A key merges its major and minor modes, so it
/// is identified by its tonic pitch class alone.
class Key {
 public:
  constexpr Key() = default;
  constexpr explicit Key(PitchClass tonic) : tonic_(tonic) {}

  constexpr PitchClass tonic() const { return tonic_; }
  constexpr Key transposed(int semitones) const {
    return Key(tonic_.shifted(semitones));
  }

  std::string_view name() const { return kKeyNames[tonic_.value()]; }

  /// Position of this key in the fifths-ordered listing C, G, D, A, E, B,
  /// F#, C#, Ab, Eb, Bb, F used by score reports and for tie-breaking.
  constexpr int row_index() const { return kRowIndex[tonic_.value()]; }

  static constexpr std::array<Key, 12> row_order() {
    std::array<Key, 12> keys{};
    for (int i = 0; i < 12; ++i) keys[i] = Key(PitchClass(kRowTonics[i]));
    return keys;
  }

  static std::optional<Key> from_name(std::string_view text) {
    auto root = detail::parse_root(text);
    if (!root || !root->second.empty()) return std::nullopt;
    return Key(root->first);
  }

  friend constexpr auto operator<=>(Key, Key) = default;

 private:
  static constexpr std::array<std::string_view, 12> kKeyNames = {
      "C", "C#", "D", "Eb", "E", "F", "F#", "G", "Ab", "A", "Bb", "B"};
  static constexpr std::array<int, 12> kRowTonics = {0, 7, 2, 9,  4, 11,
                                                     6, 1, 8, 3, 10, 5};
  static constexpr std::array<int, 12> kRowIndex = [] {
    std::array<int, 12> idx{};
    for (int i = 0; i < 12; ++i) idx[kRowTonics[i]] = i;
    return idx;
  }();
  PitchClass tonic_;
};

}  // namespace tonalis
