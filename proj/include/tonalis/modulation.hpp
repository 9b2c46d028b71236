#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "tonalis/keyscore.hpp"
#include "tonalis/pitch.hpp"

namespace tonalis {

struct SequenceTooShort : std::runtime_error {
  SequenceTooShort(int len, int window)
      : std::runtime_error("sequence of " + std::to_string(len) +
                           " chords is shorter than the window of " +
                           std::to_string(window)),
        length(len),
        window(window) {}
  int length;
  int window;
};

struct WindowConfig {
  /// Window length in chords. 6 works well for common-practice harmony;
  /// smaller values react faster but over-detect brief excursions.
  int window = 6;
  /// How many consecutive windows a key must dominate before it counts as
  /// established. 0 means "same as window".
  int min_established = 0;

  int established_threshold() const {
    return min_established > 0 ? min_established : window;
  }

  void validate(int sequence_length) const {
    if (window < 2) throw std::invalid_argument("window must be at least 2");
    if (min_established < 0)
      throw std::invalid_argument("min_established must be positive");
    if (sequence_length < window) throw SequenceTooShort(sequence_length, window);
  }
};

/// Evidence totals for one window position. Chord indices are 1-based and
/// inclusive, matching how analyses are written out.
struct WindowScore {
  int start = 0;
  int end = 0;
  KeyEvidence evidence;
  Key dominant;

  friend bool operator==(const WindowScore&, const WindowScore&) = default;
};

enum class ModulationKind { Regular, Passing, Tonicization };

constexpr std::string_view to_string(ModulationKind k) {
  switch (k) {
    case ModulationKind::Regular: return "regular";
    case ModulationKind::Passing: return "passing";
    case ModulationKind::Tonicization: return "tonicization";
  }
  return "regular";
}

struct Modulation {
  Key from_key;
  Key to_key;
  /// Start chord index of the first window whose dominant changed.
  int window_start = 0;
  /// The pivot sits at 1-based position floor(W/2) of that window.
  int pivot_index = 0;
  ModulationKind kind = ModulationKind::Regular;

  friend bool operator==(const Modulation&, const Modulation&) = default;
};

/// A maximal span in one key. Consecutive segments overlap in exactly one
/// chord, the pivot, which belongs to both keys.
struct Segment {
  Key key;
  int first = 0;
  int last = 0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

struct ModulationReport {
  std::vector<WindowScore> windows;
  std::vector<Modulation> modulations;
  std::vector<Segment> segments;

  friend bool operator==(const ModulationReport&, const ModulationReport&) = default;
};

namespace detail {

/// Dominant-key selection. Ties keep the previous window's dominant when it
/// is among the maxima (hysteresis); otherwise the first key in fifths row
/// order wins, which pins down the first window deterministically.
inline Key dominant_key(const KeyEvidence& ev, const Key* previous) {
  int best = -1;
  for (int t = 0; t < 12; ++t) best = std::max(best, ev.totals()[t]);
  if (previous && ev.total_for(*previous) == best) return *previous;
  for (Key k : Key::row_order())
    if (ev.total_for(k) == best) return k;
  return Key{};
}

}  // namespace detail

/// Scores every length-W window, stride 1. Evidence is maintained
/// incrementally: the entering chord's profile is added and the leaving
/// chord's subtracted.
inline std::vector<WindowScore> window_scores(std::span<const Chord> seq,
                                              const WindowConfig& cfg) {
  cfg.validate(static_cast<int>(seq.size()));
  const int n = static_cast<int>(seq.size());
  const int w = cfg.window;

  std::vector<WindowScore> out;
  out.reserve(n - w + 1);

  KeyEvidence ev = accumulate(seq.subspan(0, w));
  Key dominant = detail::dominant_key(ev, nullptr);
  out.push_back(WindowScore{1, w, ev, dominant});

  for (int start = 2; start + w - 1 <= n; ++start) {
    ev -= key_profile(seq[start - 2]);
    ev += key_profile(seq[start + w - 2]);
    dominant = detail::dominant_key(ev, &dominant);
    out.push_back(WindowScore{start, start + w - 1, ev, dominant});
  }
  return out;
}

/// Fills in the modulation kinds from the pattern of dominant-key runs.
/// A run shorter than the established threshold is a brief excursion: if the
/// established keys on both sides agree it is a tonicization, otherwise a
/// passing modulation. The opening and closing runs of a piece are treated
/// as established regardless of length, having nothing to compare against.
inline std::vector<Modulation> classify(std::vector<Modulation> mods,
                                        const std::vector<WindowScore>& windows,
                                        const WindowConfig& cfg) {
  if (mods.empty()) return mods;

  struct Run {
    Key key;
    int length = 0;
  };
  std::vector<Run> runs;
  for (const auto& w : windows) {
    if (runs.empty() || !(runs.back().key == w.dominant))
      runs.push_back(Run{w.dominant, 1});
    else
      ++runs.back().length;
  }

  const int threshold = cfg.established_threshold();
  const int last = static_cast<int>(runs.size()) - 1;
  auto established = [&](int i) {
    return i == 0 || i == last || runs[i].length >= threshold;
  };
  auto nearest_established_before = [&](int i) {
    for (int j = i - 1; j >= 0; --j)
      if (established(j)) return runs[j].key;
    return runs.front().key;
  };
  auto nearest_established_after = [&](int i) {
    for (int j = i + 1; j <= last; ++j)
      if (established(j)) return runs[j].key;
    return runs.back().key;
  };
  auto run_label = [&](int i) {
    return nearest_established_before(i) == nearest_established_after(i)
               ? ModulationKind::Tonicization
               : ModulationKind::Passing;
  };

  // Modulation i is the boundary between runs i and i+1.
  for (std::size_t i = 0; i < mods.size(); ++i) {
    int left = static_cast<int>(i);
    int right = left + 1;
    if (!established(left))
      mods[i].kind = run_label(left);
    else if (!established(right))
      mods[i].kind = run_label(right);
    else
      mods[i].kind = ModulationKind::Regular;
  }
  return mods;
}

/// Tracks the dominant key across the sliding windows and reports every
/// change as a modulation, placing the pivot at the centre of the detecting
/// window and cutting the piece into overlapping single-key segments.
inline ModulationReport detect_modulations(std::span<const Chord> seq,
                                           const WindowConfig& cfg) {
  ModulationReport report;
  report.windows = window_scores(seq, cfg);

  const int n = static_cast<int>(seq.size());
  const int half = cfg.window / 2;
  for (std::size_t i = 1; i < report.windows.size(); ++i) {
    const WindowScore& prev = report.windows[i - 1];
    const WindowScore& cur = report.windows[i];
    if (prev.dominant == cur.dominant) continue;
    int pivot = std::clamp(cur.start + half - 1, 1, n);
    report.modulations.push_back(
        Modulation{prev.dominant, cur.dominant, cur.start, pivot});
  }
  report.modulations = classify(std::move(report.modulations), report.windows, cfg);

  int first = 1;
  Key key = report.windows.front().dominant;
  for (const Modulation& m : report.modulations) {
    report.segments.push_back(Segment{key, first, m.pivot_index});
    first = m.pivot_index;
    key = m.to_key;
  }
  report.segments.push_back(Segment{key, first, n});
  return report;
}

}  // namespace tonalis
