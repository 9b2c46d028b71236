#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tonalis/grammar.hpp"
#include "tonalis/keyscore.hpp"
#include "tonalis/modulation.hpp"
#include "tonalis/numeral.hpp"
#include "tonalis/pitch.hpp"

namespace tonalis {

inline std::optional<ModulationKind> modulation_kind_from_string(std::string_view s) {
  if (s == "regular") return ModulationKind::Regular;
  if (s == "passing") return ModulationKind::Passing;
  if (s == "tonicization") return ModulationKind::Tonicization;
  return std::nullopt;
}

/// Per-segment outcome: the numeral row and its parse. When a chord in the
/// segment has no numeral in the segment key, the analysis is kept with the
/// offending chord index recorded instead of being dropped.
struct SegmentAnalysis {
  Segment segment;
  std::vector<NumeralTerminal> numerals;
  ParseResult parse;
  std::optional<int> unmappable_index;

  friend bool operator==(const SegmentAnalysis&, const SegmentAnalysis&) = default;
};

struct AnalysisReport {
  std::string piece;
  std::vector<Chord> chords;
  ModulationReport modulation;
  std::vector<SegmentAnalysis> segments;

  bool fully_parsed() const {
    for (const SegmentAnalysis& s : segments)
      if (s.parse.trees_found == 0) return false;
    return true;
  }

  friend bool operator==(const AnalysisReport&, const AnalysisReport&) = default;
};

/// Full pipeline: detect modulations, assign numerals per segment, parse
/// each segment. Segments that fail to map or parse stay in the report
/// with diagnostics.
inline AnalysisReport analyze(std::string piece_name, std::vector<Chord> chords,
                              const WindowConfig& cfg,
                              const ParseOptions& parse_options = {}) {
  AnalysisReport report;
  report.piece = std::move(piece_name);
  report.chords = std::move(chords);
  report.modulation = detect_modulations(report.chords, cfg);
  for (const Segment& seg : report.modulation.segments) {
    SegmentAnalysis sa;
    sa.segment = seg;
    try {
      sa.numerals = assign_segment(report.chords, seg);
      sa.parse = parse(Grammar::tonal_harmony(), sa.numerals, parse_options);
    } catch (const UnmappableChord& e) {
      sa.numerals.clear();
      sa.parse = ParseResult{};
      sa.unmappable_index = e.index;
    }
    report.segments.push_back(std::move(sa));
  }
  return report;
}

struct IngestResult {
  std::string piece_name;
  std::vector<Chord> chords;
};

/// Reads whitespace-separated chord tokens. Lines starting with '#' are
/// comments; a comment on the very first line names the piece.
inline IngestResult ingest(std::istream& in) {
  IngestResult out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    if (i < line.size() && line[i] == '#') {
      if (line_no == 1) {
        std::size_t j = i + 1;
        while (j < line.size() && (line[j] == ' ' || line[j] == '\t')) ++j;
        out.piece_name = line.substr(j);
        while (!out.piece_name.empty() &&
               (out.piece_name.back() == ' ' || out.piece_name.back() == '\t'))
          out.piece_name.pop_back();
      }
      continue;
    }
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) {
        std::string token = line.substr(i, j - i);
        try {
          out.chords.push_back(parse_chord(token));
        } catch (const MalformedChord&) {
          throw MalformedChord(token, line_no, static_cast<int>(i) + 1);
        }
      }
      i = j;
    }
  }
  if (out.chords.empty()) throw EmptySequence();
  return out;
}

inline IngestResult ingest_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  IngestResult out = ingest(in);
  if (out.piece_name.empty()) out.piece_name = path.stem().string();
  return out;
}

enum class ReportFormat { Json, Dot, Csv };

inline std::optional<ReportFormat> report_format_from_string(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "dot") return ReportFormat::Dot;
  if (s == "csv") return ReportFormat::Csv;
  return std::nullopt;
}

/// Per-window key-score matrix, keys in fifths row order.
inline std::string emit_csv(const AnalysisReport& report) {
  std::ostringstream os;
  os << "window_start,window_end";
  for (Key k : Key::row_order()) os << ',' << k.name();
  os << ",dominant\n";
  for (const WindowScore& w : report.modulation.windows) {
    os << w.start << ',' << w.end;
    for (Key k : Key::row_order()) os << ',' << w.evidence.total_for(k);
    os << ',' << w.dominant.name() << '\n';
  }
  return os.str();
}

/// One digraph per segment tree. Leaves are keyed by absolute chord index,
/// so adjacent trees share exactly the pivot leaf; pivots get a double
/// border.
inline std::string emit_dot(const AnalysisReport& report) {
  std::ostringstream os;
  for (std::size_t si = 0; si < report.segments.size(); ++si) {
    const SegmentAnalysis& sa = report.segments[si];
    const Segment& seg = sa.segment;
    os << "digraph segment_" << si + 1 << " {\n";
    os << "  label=\"key " << seg.key.name() << ", chords " << seg.first << "-"
       << seg.last << "\";\n";
    os << "  node [shape=none];\n";
    if (sa.parse.canonical) {
      int next_internal = 0;
      int next_leaf = seg.first;
      auto is_pivot = [&](int chord_index) {
        for (const Modulation& m : report.modulation.modulations)
          if (m.pivot_index == chord_index) return true;
        return false;
      };
      auto emit_node = [&](const ParseTree& node, auto&& self) -> std::string {
        if (node.symbol.is_terminal()) {
          int chord_index = next_leaf++;
          std::string id = "leaf_" + std::to_string(chord_index);
          os << "  " << id << " [shape=box, label=\"" << node.symbol.name()
             << "\\n" << report.chords[chord_index - 1].spelling << " ("
             << chord_index << ")\"";
          if (is_pivot(chord_index)) os << ", peripheries=2";
          os << "];\n";
          return id;
        }
        std::string id = "n" + std::to_string(next_internal++);
        os << "  " << id << " [label=\"" << node.symbol.name() << "\"];\n";
        for (const ParseTree& child : node.children) {
          std::string child_id = self(child, self);
          os << "  " << id << " -> " << child_id << ";\n";
        }
        return id;
      };
      emit_node(*sa.parse.canonical, emit_node);
    } else if (sa.unmappable_index) {
      os << "  diag [label=\"chord " << *sa.unmappable_index
         << " has no numeral in " << seg.key.name() << "\"];\n";
    } else {
      os << "  diag [label=\"no parse (viable prefix " << sa.parse.viable_prefix
         << ")\"];\n";
    }
    os << "}\n";
  }
  return os.str();
}

inline nlohmann::ordered_json report_to_json(const AnalysisReport& report) {
  nlohmann::ordered_json j;
  j["piece"] = report.piece;
  j["chords"] = nlohmann::ordered_json::array();
  for (const Chord& c : report.chords) j["chords"].push_back(c.spelling);
  j["windows"] = nlohmann::ordered_json::array();
  for (const WindowScore& w : report.modulation.windows) {
    nlohmann::ordered_json jw;
    jw["start"] = w.start;
    jw["end"] = w.end;
    jw["totals"] = nlohmann::ordered_json::array();
    for (Key k : Key::row_order()) jw["totals"].push_back(w.evidence.total_for(k));
    jw["dominant"] = w.dominant.name();
    j["windows"].push_back(std::move(jw));
  }
  j["modulations"] = nlohmann::ordered_json::array();
  for (const Modulation& m : report.modulation.modulations) {
    nlohmann::ordered_json jm;
    jm["from"] = m.from_key.name();
    jm["to"] = m.to_key.name();
    jm["window_start"] = m.window_start;
    jm["pivot"] = m.pivot_index;
    jm["kind"] = to_string(m.kind);
    j["modulations"].push_back(std::move(jm));
  }
  j["segments"] = nlohmann::ordered_json::array();
  for (const Segment& s : report.modulation.segments) {
    nlohmann::ordered_json js;
    js["key"] = s.key.name();
    js["first"] = s.first;
    js["last"] = s.last;
    j["segments"].push_back(std::move(js));
  }
  j["trees"] = nlohmann::ordered_json::array();
  for (const SegmentAnalysis& sa : report.segments) {
    nlohmann::ordered_json jt;
    jt["key"] = sa.segment.key.name();
    jt["first"] = sa.segment.first;
    jt["last"] = sa.segment.last;
    jt["numerals"] = nlohmann::ordered_json::array();
    for (const NumeralTerminal& n : sa.numerals)
      jt["numerals"].push_back(n.to_string());
    jt["trees_found"] = sa.parse.trees_found;
    jt["capped"] = sa.parse.capped;
    jt["viable_prefix"] = sa.parse.viable_prefix;
    if (sa.parse.canonical) jt["canonical"] = to_bracketed(*sa.parse.canonical);
    if (sa.unmappable_index) jt["unmappable_index"] = *sa.unmappable_index;
    j["trees"].push_back(std::move(jt));
  }
  return j;
}

inline std::string emit_json(const AnalysisReport& report) {
  return report_to_json(report).dump(2) + "\n";
}

inline std::string emit(const AnalysisReport& report, ReportFormat format) {
  switch (format) {
    case ReportFormat::Json: return emit_json(report);
    case ReportFormat::Dot: return emit_dot(report);
    case ReportFormat::Csv: return emit_csv(report);
  }
  return {};
}

/// Rebuilds a report from its JSON form; emit_json followed by
/// report_from_json is the identity on reports.
inline AnalysisReport report_from_json(std::string_view text) {
  const auto j = nlohmann::json::parse(text);
  AnalysisReport report;
  report.piece = j.at("piece").get<std::string>();
  for (const auto& jc : j.at("chords"))
    report.chords.push_back(parse_chord(jc.get<std::string>()));

  auto key_of = [](const nlohmann::json& v) {
    auto k = Key::from_name(v.get<std::string>());
    if (!k) throw std::runtime_error("unknown key name in report: " + v.dump());
    return *k;
  };
  for (const auto& jw : j.at("windows")) {
    WindowScore w;
    w.start = jw.at("start").get<int>();
    w.end = jw.at("end").get<int>();
    const auto& totals = jw.at("totals");
    if (totals.size() != 12)
      throw std::runtime_error("window totals must have 12 entries");
    auto order = Key::row_order();
    for (int i = 0; i < 12; ++i)
      w.evidence.total_for(order[i]) = totals[i].get<int>();
    w.dominant = key_of(jw.at("dominant"));
    report.modulation.windows.push_back(std::move(w));
  }
  for (const auto& jm : j.at("modulations")) {
    Modulation m;
    m.from_key = key_of(jm.at("from"));
    m.to_key = key_of(jm.at("to"));
    m.window_start = jm.at("window_start").get<int>();
    m.pivot_index = jm.at("pivot").get<int>();
    auto kind = modulation_kind_from_string(jm.at("kind").get<std::string>());
    if (!kind) throw std::runtime_error("unknown modulation kind");
    m.kind = *kind;
    report.modulation.modulations.push_back(m);
  }
  for (const auto& js : j.at("segments"))
    report.modulation.segments.push_back(Segment{key_of(js.at("key")),
                                                 js.at("first").get<int>(),
                                                 js.at("last").get<int>()});
  for (const auto& jt : j.at("trees")) {
    SegmentAnalysis sa;
    sa.segment = Segment{key_of(jt.at("key")), jt.at("first").get<int>(),
                         jt.at("last").get<int>()};
    for (const auto& jn : jt.at("numerals")) {
      auto n = NumeralTerminal::from_string(jn.get<std::string>());
      if (!n) throw std::runtime_error("unknown numeral in report: " + jn.dump());
      sa.numerals.push_back(*n);
    }
    sa.parse.trees_found = jt.at("trees_found").get<std::uint64_t>();
    sa.parse.capped = jt.at("capped").get<bool>();
    sa.parse.viable_prefix = jt.at("viable_prefix").get<int>();
    if (jt.contains("canonical")) {
      sa.parse.canonical = from_bracketed(jt.at("canonical").get<std::string>());
      if (!sa.parse.canonical)
        throw std::runtime_error("malformed canonical tree in report");
    }
    if (jt.contains("unmappable_index"))
      sa.unmappable_index = jt.at("unmappable_index").get<int>();
    report.segments.push_back(std::move(sa));
  }
  return report;
}

}  // namespace tonalis
