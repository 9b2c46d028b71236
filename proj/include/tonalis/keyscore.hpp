#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "tonalis/pitch.hpp"

namespace tonalis {

struct EmptySequence : std::runtime_error {
  EmptySequence() : std::runtime_error("chord sequence is empty") {}
};

/// Accumulated centrality evidence, one integer total per key, indexed by
/// the key's tonic pitch class.
class KeyEvidence {
 public:
  constexpr KeyEvidence() : totals_{} {}

  constexpr int total_for(Key k) const { return totals_[k.tonic().value()]; }
  constexpr int& total_for(Key k) { return totals_[k.tonic().value()]; }
  constexpr const std::array<int, 12>& totals() const { return totals_; }

  constexpr KeyEvidence& operator+=(const KeyEvidence& other) {
    for (int i = 0; i < 12; ++i) totals_[i] += other.totals_[i];
    return *this;
  }
  constexpr KeyEvidence& operator-=(const KeyEvidence& other) {
    for (int i = 0; i < 12; ++i) totals_[i] -= other.totals_[i];
    return *this;
  }
  friend constexpr KeyEvidence operator+(KeyEvidence a, const KeyEvidence& b) {
    return a += b;
  }
  friend constexpr bool operator==(const KeyEvidence&, const KeyEvidence&) = default;

 private:
  std::array<int, 12> totals_;
};

namespace detail {

struct MasterEntry {
  int root;
  ChordQuality quality;
  int score;
};

/// The chord-centrality scores for the key of C. Chords absent from the
/// list score 0; the handful of chords that belong to both the major and
/// minor modes keep the maximum of their row values.
inline constexpr MasterEntry kMasterOfC[] = {
    // major mode, diatonic
    {0, ChordQuality::Major, 5},
    {2, ChordQuality::Minor, 3},
    {4, ChordQuality::Minor, 2},
    {5, ChordQuality::Major, 3},
    {7, ChordQuality::Major, 5},
    {7, ChordQuality::Dominant7, 5},
    {9, ChordQuality::Minor, 3},
    {11, ChordQuality::Diminished, 3},
    // major mode, secondary dominants
    {9, ChordQuality::Major, 1},
    {9, ChordQuality::Dominant7, 1},
    {11, ChordQuality::Major, 1},
    {11, ChordQuality::Dominant7, 1},
    {0, ChordQuality::Dominant7, 1},
    {2, ChordQuality::Major, 1},
    {2, ChordQuality::Dominant7, 1},
    {4, ChordQuality::Major, 1},
    {4, ChordQuality::Dominant7, 1},
    // minor mode (ascending/harmonic/descending scales)
    {0, ChordQuality::Minor, 5},
    {2, ChordQuality::Diminished, 2},
    {5, ChordQuality::Minor, 3},
    {8, ChordQuality::Major, 2},
    {3, ChordQuality::Major, 2},
    {7, ChordQuality::Minor, 2},
    {10, ChordQuality::Major, 2},
    // minor mode, secondary dominants
    {10, ChordQuality::Dominant7, 1},
    {3, ChordQuality::Dominant7, 1},
    {5, ChordQuality::Dominant7, 1},
    // Neapolitan bII
    {1, ChordQuality::Major, 1},
};

constexpr int chord_slot(PitchClass root, ChordQuality q) {
  return root.value() * 4 + quality_index(q);
}

}  // namespace detail

/// Chord -> centrality score map for one key. The table for key k is the
/// key-of-C master with every chord shifted by k's tonic.
class CentralityTable {
 public:
  Key key() const { return key_; }

  int lookup(const Chord& c) const {
    return scores_[detail::chord_slot(c.root, c.quality)];
  }

  /// All chords with a nonzero score, in (root, quality) order, with their
  /// canonical spellings. This is the CSV dump order.
  std::vector<std::pair<Chord, int>> scored_chords() const {
    std::vector<std::pair<Chord, int>> out;
    for (int root = 0; root < 12; ++root) {
      for (int q = 0; q < 4; ++q) {
        int s = scores_[root * 4 + q];
        if (s > 0)
          out.emplace_back(
              make_chord(PitchClass(root), static_cast<ChordQuality>(q)), s);
      }
    }
    return out;
  }

  static const CentralityTable& master_of_c() { return for_key(Key(PitchClass(0))); }

  /// Memoized; all twelve tables are built once and shared immutably.
  static const CentralityTable& for_key(Key k) {
    static const std::array<CentralityTable, 12> tables = [] {
      std::array<CentralityTable, 12> t{};
      for (int tonic = 0; tonic < 12; ++tonic) {
        t[tonic].key_ = Key(PitchClass(tonic));
        for (const auto& e : detail::kMasterOfC) {
          int slot = detail::chord_slot(PitchClass(e.root).shifted(tonic), e.quality);
          if (e.score > t[tonic].scores_[slot]) t[tonic].scores_[slot] = e.score;
        }
      }
      return t;
    }();
    return tables[k.tonic().value()];
  }

 private:
  Key key_;
  std::array<int, 48> scores_{};
};

inline int score_chord(const Chord& c, Key key) {
  return CentralityTable::for_key(key).lookup(c);
}

/// The chord's score in each of the 12 keys, indexed by tonic pitch class.
inline KeyEvidence key_profile(const Chord& c) {
  KeyEvidence ev;
  for (int tonic = 0; tonic < 12; ++tonic) {
    Key k{PitchClass(tonic)};
    ev.total_for(k) = score_chord(c, k);
  }
  return ev;
}

/// Sums every chord's score in every key over the sequence.
inline KeyEvidence accumulate(std::span<const Chord> seq) {
  if (seq.empty()) throw EmptySequence();
  KeyEvidence ev;
  for (const Chord& c : seq) ev += key_profile(c);
  return ev;
}

}  // namespace tonalis
