#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <tonalis/tonalis.hpp>

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kExtension[] = {"json", "dot", "csv"};

std::optional<tonalis::ParseOptions> parse_options_from_env() {
  tonalis::ParseOptions opts;
  if (const char* env = std::getenv("TONALIS_PARSE_BOUND")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0' || v == 0) {
      std::cerr << "tonalis: invalid TONALIS_PARSE_BOUND value '" << env << "'\n";
      return std::nullopt;
    }
    opts.count_cap = v;
  }
  return opts;
}

tonalis::Key key_from_cli(const std::string& text) {
  auto key = tonalis::Key::from_name(text);
  if (!key)
    throw CLI::ValidationError("key", "unknown key '" + text +
                                          "' (expected e.g. C, F#, Eb)");
  return *key;
}

void write_output(const std::string& text, const std::string& out_dir,
                  const fs::path& input, tonalis::ReportFormat format) {
  if (out_dir.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(out_dir);
  fs::path out = fs::path(out_dir) /
                 (input.stem().string() + "." +
                  std::string(kExtension[static_cast<int>(format)]));
  std::ofstream os(out, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + out.string());
  os << text;
}

int run_analyze(const std::vector<std::string>& files, int window,
                int min_established, const std::string& format_name,
                const std::string& out_dir) {
  auto format = tonalis::report_format_from_string(format_name);
  if (!format) {
    std::cerr << "tonalis: unknown format '" << format_name << "'\n";
    return 1;
  }
  auto parse_opts = parse_options_from_env();
  if (!parse_opts) return 1;
  tonalis::WindowConfig cfg{window, min_established};

  std::vector<std::future<tonalis::AnalysisReport>> pending;
  pending.reserve(files.size());
  for (const std::string& file : files)
    pending.push_back(std::async(std::launch::async, [&, file] {
      auto input = tonalis::ingest_file(file);
      return tonalis::analyze(std::move(input.piece_name), std::move(input.chords),
                              cfg, *parse_opts);
    }));

  bool input_error = false;
  bool parse_failure = false;
  for (std::size_t i = 0; i < files.size(); ++i) {
    try {
      tonalis::AnalysisReport report = pending[i].get();
      if (!report.fully_parsed()) parse_failure = true;
      write_output(tonalis::emit(report, *format), out_dir, files[i], *format);
    } catch (const std::exception& e) {
      std::cerr << "tonalis: " << files[i] << ": " << e.what() << "\n";
      input_error = true;
    }
  }
  return input_error ? 1 : parse_failure ? 2 : 0;
}

int run_score(const std::string& file) {
  auto input = tonalis::ingest_file(file);
  tonalis::KeyEvidence totals = tonalis::accumulate(input.chords);
  std::ostringstream os;
  os << "key,total\n";
  for (tonalis::Key k : tonalis::Key::row_order())
    os << k.name() << ',' << totals.total_for(k) << '\n';
  std::cout << os.str();
  return 0;
}

int run_modulate(const std::string& file, int window, int min_established) {
  auto input = tonalis::ingest_file(file);
  tonalis::WindowConfig cfg{window, min_established};
  tonalis::AnalysisReport report;
  report.chords = std::move(input.chords);
  report.modulation = tonalis::detect_modulations(report.chords, cfg);
  std::cout << tonalis::emit_csv(report);
  return 0;
}

int run_parse(const std::string& file, const std::string& key_name) {
  tonalis::Key key = key_from_cli(key_name);
  auto parse_opts = parse_options_from_env();
  if (!parse_opts) return 1;
  auto input = tonalis::ingest_file(file);

  std::vector<tonalis::NumeralTerminal> numerals;
  for (std::size_t i = 0; i < input.chords.size(); ++i) {
    if (!tonalis::is_mappable(input.chords[i], key))
      throw tonalis::UnmappableChord(input.chords[i], key, static_cast<int>(i) + 1);
    numerals.push_back(tonalis::assign_numeral(input.chords[i], key));
  }

  std::ostringstream os;
  os << "numerals:";
  for (const auto& n : numerals) os << ' ' << n.to_string();
  os << '\n';

  auto result = tonalis::parse(tonalis::Grammar::tonal_harmony(), numerals,
                               *parse_opts);
  os << "trees_found: " << result.trees_found << (result.capped ? "+" : "") << '\n';
  if (result.canonical) {
    os << tonalis::to_bracketed(*result.canonical) << '\n';
    std::cout << os.str();
    return 0;
  }
  os << "no parse: the first " << result.viable_prefix << " of "
     << numerals.size() << " numerals can begin a valid piece\n";
  std::cout << os.str();
  return 2;
}

int run_dump_table(const std::string& key_name) {
  tonalis::Key key = key_from_cli(key_name);
  const auto& table = tonalis::CentralityTable::for_key(key);
  std::ostringstream os;
  os << "chord,score\n";
  for (const auto& [chord, score] : table.scored_chords())
    os << chord.spelling << ',' << score << '\n';
  std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "tonalis: key detection, modulation tracking and grammatical analysis "
      "of chord sequences"};
  app.require_subcommand(1);

  std::vector<std::string> files;
  std::string file;
  std::string format = "json";
  std::string out_dir;
  std::string key_name;
  int window = 6;
  int min_established = 0;

  auto* analyze = app.add_subcommand(
      "analyze", "Detect modulations and parse each tonal segment");
  analyze->add_option("files", files, "chord files")->required();
  analyze->add_option("--window,-w", window, "sliding window length in chords");
  analyze->add_option("--min-established,-m", min_established,
                      "windows a key must dominate to count as established "
                      "(default: window length)");
  analyze->add_option("--format,-f", format, "json, dot or csv");
  analyze->add_option("--out,-o", out_dir,
                      "write one output file per input into this directory");

  auto* score = app.add_subcommand("score", "Accumulate key evidence for a file");
  score->add_option("file", file, "chord file")->required();

  auto* modulate =
      app.add_subcommand("modulate", "Per-window key-score matrix as CSV");
  modulate->add_option("file", file, "chord file")->required();
  modulate->add_option("--window,-w", window, "sliding window length in chords");
  modulate->add_option("--min-established,-m", min_established,
                       "established-run threshold in windows");

  auto* parse = app.add_subcommand(
      "parse", "Assign numerals in a fixed key and parse the whole sequence");
  parse->add_option("file", file, "chord file")->required();
  parse->add_option("--key,-k", key_name, "key for numeral assignment")->required();

  auto* dump =
      app.add_subcommand("dump-table", "Centrality table of a key as CSV");
  dump->add_option("key", key_name, "key, e.g. C, F#, Eb")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze))
      return run_analyze(files, window, min_established, format, out_dir);
    if (app.got_subcommand(score)) return run_score(file);
    if (app.got_subcommand(modulate))
      return run_modulate(file, window, min_established);
    if (app.got_subcommand(parse)) return run_parse(file, key_name);
    if (app.got_subcommand(dump)) return run_dump_table(key_name);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "tonalis: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "tonalis: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
