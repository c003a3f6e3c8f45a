#pragma once

// Command-line front end. Exit codes: 0 success, 1 data error, 2 config or
// usage error.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hypersumm/config.hpp"
#include "hypersumm/corpus.hpp"
#include "hypersumm/html_export.hpp"
#include "hypersumm/hypergraph.hpp"
#include "hypersumm/noise.hpp"
#include "hypersumm/preprocess.hpp"
#include "hypersumm/rouge.hpp"

namespace hypersumm::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitConfigError = 2;

inline constexpr const char* kConfigEnvVar = "HYPERSUMM_CONFIG";

/// Input or output file problem; reported as a data error.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string input;
  std::string output;
  std::string config;
  std::string summaries;
  std::string candidates;
  std::string references;
  std::string qr_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replicas;
  std::size_t jobs = 1;
};

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("cannot write " + path.string());
}

inline std::string plural(std::size_t n, const std::string& word) {
  return std::to_string(n) + " " + word + (n == 1 ? "" : "s");
}

inline std::string percent(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
  return buf;
}

inline ToolkitConfig resolve_config(const Options& opts, const std::set<Section>& required) {
  std::string path = opts.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnvVar); env != nullptr && *env != '\0') path = env;
  }
  if (path.empty()) return ToolkitConfig{};
  return load_config(path, required);
}

inline std::string pick(const std::string& flag, const std::string& from_config, const char* name) {
  if (!flag.empty()) return flag;
  if (!from_config.empty()) return from_config;
  throw ConfigError(std::string("missing required option --") + name);
}

inline Corpus load_corpus(const std::string& path) {
  std::istringstream in(read_file(path));
  return parse_corpus(in);
}

/// Runs `task(i)` for i in [0, count) on up to `jobs` threads. Results must be
/// written to per-index slots so output order does not depend on scheduling.
template <typename Task>
void parallel_for(std::size_t count, std::size_t jobs, Task task) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline std::vector<SummaryPair> summary_pairs(const Corpus& corpus, const std::vector<SummaryRecord>& records) {
  std::vector<SummaryPair> out;
  for (const auto& r : records) {
    const Dialogue* d = corpus.find(r.dialogue_id);
    if (d == nullptr) {
      throw CorpusError("summary for unknown dialogue_id " + r.dialogue_id, r.line);
    }
    out.push_back({r.dialogue_id, build_qr_text(*d), r.summary});
  }
  return out;
}

/// Maps exceptions onto exit codes and prints the message.
template <typename Fn>
int guarded(std::ostream& err, Fn fn) {
  try {
    return fn();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitDataError;
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Commands

inline int cmd_ingest(const Options& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ToolkitConfig cfg = detail::resolve_config(opts, {});
    const Corpus corpus = detail::load_corpus(detail::pick(opts.input, cfg.paths.input, "input"));
    const std::string output = opts.output.empty() ? cfg.paths.output : opts.output;
    if (!output.empty()) detail::write_file(output, serialize_corpus(corpus));
    out << detail::plural(corpus.dialogues.size(), "dialogue") << ", "
        << detail::plural(corpus.turn_count(), "turn") << '\n';
    return kExitOk;
  });
}

inline Corpus run_preprocess(const Corpus& corpus, const ToolkitConfig& cfg) {
  return preprocess_corpus(corpus, make_adapter(cfg.translate.adapter), cfg.translate.target_lang,
                           cfg.clean_policy);
}

/// Writes one Q/R text file per interview; returns the file count.
inline std::size_t write_qr_files(const Corpus& corpus, const std::filesystem::path& dir) {
  for (const auto& d : corpus.dialogues) {
    detail::write_file(dir / (text::slug(d.interview_id) + ".txt"), build_qr_text(d) + "\n");
  }
  return corpus.dialogues.size();
}

inline int cmd_preprocess(const Options& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ToolkitConfig cfg = detail::resolve_config(opts, {Section::clean, Section::translate});
    const Corpus corpus = detail::load_corpus(detail::pick(opts.input, cfg.paths.input, "input"));
    const std::filesystem::path output = detail::pick(opts.output, cfg.paths.output, "output");
    const Corpus cleaned = run_preprocess(corpus, cfg);
    detail::write_file(output, serialize_corpus(cleaned));
    const std::filesystem::path qr_dir =
        opts.qr_dir.empty() ? output.parent_path() / "qr" : std::filesystem::path(opts.qr_dir);
    const std::size_t files = write_qr_files(cleaned, qr_dir);
    out << detail::plural(cleaned.dialogues.size(), "dialogue") << ", "
        << detail::plural(cleaned.turn_count(), "turn") << ", " << detail::plural(files, "Q/R file") << '\n';
    return kExitOk;
  });
}

inline std::string run_corrupt(const Corpus& corpus, const NoiseConfig& noise, std::size_t replicas,
                               std::size_t jobs) {
  const std::size_t total = corpus.dialogues.size() * replicas;
  std::vector<std::string> lines(total);
  detail::parallel_for(total, jobs, [&](std::size_t i) {
    const Dialogue& d = corpus.dialogues[i / replicas];
    lines[i] = denoise_pair_to_json(apply_window_denoise(d, noise, i % replicas)).dump();
  });
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

inline int cmd_corrupt(const Options& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    ToolkitConfig cfg = detail::resolve_config(opts, {Section::noise});
    if (opts.seed) cfg.noise.seed = *opts.seed;
    if (opts.replicas) cfg.replicas = *opts.replicas;
    if (cfg.replicas == 0) throw ConfigError("--replicas must be >= 1");
    try {
      cfg.noise.validate();
    } catch (const NoiseError& e) {
      throw ConfigError(std::string("noise: ") + e.what());
    }
    const Corpus corpus = detail::load_corpus(detail::pick(opts.input, cfg.paths.input, "input"));
    const std::string output = detail::pick(opts.output, cfg.paths.output, "output");
    detail::write_file(output, run_corrupt(corpus, cfg.noise, cfg.replicas, opts.jobs));
    out << detail::plural(corpus.dialogues.size() * cfg.replicas, "pair") << " (seed " << cfg.noise.seed << ", "
        << detail::plural(cfg.replicas, "replica") << ")\n";
    return kExitOk;
  });
}

inline int cmd_score(const Options& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ToolkitConfig cfg = detail::resolve_config(opts, {Section::rouge});
    const auto cand_path = detail::pick(opts.candidates, cfg.paths.candidates, "candidates");
    const auto ref_path = detail::pick(opts.references, cfg.paths.references, "references");
    const auto candidates = parse_summaries(detail::read_file(cand_path));
    const auto references = parse_summaries(detail::read_file(ref_path));

    std::map<std::string, std::string> cand_by_id;
    for (const auto& c : candidates) {
      if (!cand_by_id.emplace(c.dialogue_id, c.summary).second) {
        throw CorpusError("duplicate candidate for " + c.dialogue_id, c.line);
      }
    }
    std::map<std::string, std::vector<std::string>> refs_by_id;
    for (const auto& r : references) refs_by_id[r.dialogue_id].push_back(r.summary);

    std::vector<std::string> unmatched;
    for (const auto& [id, text] : cand_by_id) {
      if (!refs_by_id.count(id)) unmatched.push_back(id);
    }
    for (const auto& [id, refs] : refs_by_id) {
      if (!cand_by_id.count(id)) unmatched.push_back(id);
    }
    if (!unmatched.empty()) {
      std::sort(unmatched.begin(), unmatched.end());
      err << "error: unmatched dialogue ids: " << text::join(unmatched, ", ") << '\n';
      return kExitDataError;
    }

    std::vector<rouge::ScoringItem> items;
    for (const auto& [id, text] : cand_by_id) items.push_back({text, refs_by_id.at(id)});
    const auto report = rouge::score_items(items, cfg.rouge_ns, cfg.multi_reference);
    const auto record = rouge::report_to_json(report, items.size());

    out << "metric      R      P      F\n";
    for (const auto& [key, value] : record.items()) {
      if (key == "pairs") continue;
      const auto pad = [](std::string s, std::size_t w) { return s.size() < w ? s + std::string(w - s.size(), ' ') : s; };
      const auto lpad = [](std::string s, std::size_t w) { return s.size() < w ? std::string(w - s.size(), ' ') + s : s; };
      out << pad(key, 9) << lpad(detail::percent(value.at("r").get<double>()), 7)
          << lpad(detail::percent(value.at("p").get<double>()), 7)
          << lpad(detail::percent(value.at("f").get<double>()), 7) << '\n';
    }
    out << detail::plural(items.size(), "pair") << '\n';
    const std::string output = opts.output.empty() ? cfg.paths.output : opts.output;
    if (!output.empty()) detail::write_file(output, record.dump() + "\n");
    return kExitOk;
  });
}

struct GraphOutputs {
  std::size_t nodes = 0;
  std::size_t edges = 0;
};

inline GraphOutputs run_graph(const Corpus& corpus, const std::vector<SummaryRecord>& summaries,
                              const ToolkitConfig& cfg, const std::filesystem::path& out_dir) {
  const auto pairs = detail::summary_pairs(corpus, summaries);
  const auto g = graph::build_graph(corpus, pairs, cfg.lexicon, cfg.segment_size);
  detail::write_file(out_dir / "graph.jsonl", graph::export_graph_record(g));
  graph::export_html(g, out_dir / "html");
  return {g.nodes.size(), g.edges.size()};
}

inline int cmd_graph(const Options& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    const ToolkitConfig cfg = detail::resolve_config(opts, {Section::graph});
    const Corpus corpus = detail::load_corpus(detail::pick(opts.input, cfg.paths.input, "input"));
    const std::string summaries_path = opts.summaries.empty() ? cfg.paths.summaries : opts.summaries;
    std::vector<SummaryRecord> summaries;
    if (!summaries_path.empty()) summaries = parse_summaries(detail::read_file(summaries_path));
    const std::filesystem::path out_dir = detail::pick(opts.output, cfg.paths.output, "output");
    const auto counts = run_graph(corpus, summaries, cfg, out_dir);
    out << detail::plural(counts.nodes, "node") << ", " << detail::plural(counts.edges, "edge") << '\n';
    return kExitOk;
  });
}

/// ingest → preprocess → corrupt → graph, all under one output directory:
///   corpus.jsonl, clean.jsonl, qr/, pairs.jsonl, graph/graph.jsonl, graph/html/
inline int cmd_pipeline(const Options& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    ToolkitConfig cfg =
        detail::resolve_config(opts, {Section::clean, Section::translate, Section::noise, Section::graph});
    if (opts.seed) cfg.noise.seed = *opts.seed;
    if (opts.replicas) cfg.replicas = *opts.replicas;
    if (cfg.replicas == 0) throw ConfigError("--replicas must be >= 1");
    const std::filesystem::path dir = detail::pick(opts.output, cfg.paths.output, "output");

    const Corpus corpus = detail::load_corpus(detail::pick(opts.input, cfg.paths.input, "input"));
    detail::write_file(dir / "corpus.jsonl", serialize_corpus(corpus));
    out << "ingest: " << detail::plural(corpus.dialogues.size(), "dialogue") << ", "
        << detail::plural(corpus.turn_count(), "turn") << '\n';

    const Corpus cleaned = run_preprocess(corpus, cfg);
    detail::write_file(dir / "clean.jsonl", serialize_corpus(cleaned));
    const std::size_t files = write_qr_files(cleaned, dir / "qr");
    out << "preprocess: " << detail::plural(cleaned.turn_count(), "turn") << ", "
        << detail::plural(files, "Q/R file") << '\n';

    detail::write_file(dir / "pairs.jsonl", run_corrupt(cleaned, cfg.noise, cfg.replicas, opts.jobs));
    out << "corrupt: " << detail::plural(cleaned.dialogues.size() * cfg.replicas, "pair") << '\n';

    const std::string summaries_path = opts.summaries.empty() ? cfg.paths.summaries : opts.summaries;
    std::vector<SummaryRecord> summaries;
    if (!summaries_path.empty()) summaries = parse_summaries(detail::read_file(summaries_path));
    const auto counts = run_graph(cleaned, summaries, cfg, dir / "graph");
    out << "graph: " << detail::plural(counts.nodes, "node") << ", " << detail::plural(counts.edges, "edge") << '\n';
    return kExitOk;
  });
}

inline int cmd_print_config(const Options& opts, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    out << format_config(detail::resolve_config(opts, {}));
    return kExitOk;
  });
}

// ---------------------------------------------------------------------------
// Entry point

inline int run(const std::vector<std::string>& args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Dialogue corpus toolkit: ingest, preprocess, corrupt, score and link interview transcripts"};
  app.name(args.empty() ? "hypersumm" : args.front());
  app.require_subcommand(1);

  Options opts;
  std::uint64_t seed = 0;
  std::size_t replicas = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Config file (falls back to $HYPERSUMM_CONFIG)");
    sub->add_option("--jobs", opts.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  auto* ingest = app.add_subcommand("ingest", "Validate a corpus and write it in canonical form");
  ingest->add_option("--input", opts.input, "Turn records (JSON lines)");
  ingest->add_option("--output", opts.output, "Canonical corpus output");
  add_common(ingest);

  auto* preprocess = app.add_subcommand("preprocess", "Translate, clean and build Q/R texts");
  preprocess->add_option("--input", opts.input, "Turn records (JSON lines)");
  preprocess->add_option("--output", opts.output, "Cleaned corpus output");
  preprocess->add_option("--qr-dir", opts.qr_dir, "Directory for per-interview Q/R texts (default: <output dir>/qr)");
  add_common(preprocess);

  auto* corrupt = app.add_subcommand("corrupt", "Generate denoising pairs");
  corrupt->add_option("--input", opts.input, "Turn records (JSON lines)");
  corrupt->add_option("--output", opts.output, "Denoising pair output (JSON lines)");
  auto* seed_opt = corrupt->add_option("--seed", seed, "Overrides noise.seed");
  auto* replicas_opt = corrupt->add_option("--replicas", replicas, "Pairs per dialogue (overrides noise.replicas)");
  add_common(corrupt);

  auto* score = app.add_subcommand("score", "ROUGE scores of candidate summaries against references");
  score->add_option("--candidates", opts.candidates, "Candidate summary records");
  score->add_option("--references", opts.references, "Reference summary records");
  score->add_option("--output", opts.output, "Score report output (JSON)");
  add_common(score);

  auto* graph_cmd = app.add_subcommand("graph", "Build the hypertext graph and static HTML site");
  graph_cmd->add_option("--input", opts.input, "Turn records (JSON lines)");
  graph_cmd->add_option("--summaries", opts.summaries, "Summary records");
  graph_cmd->add_option("--output", opts.output, "Output directory");
  add_common(graph_cmd);

  auto* pipeline = app.add_subcommand("pipeline", "ingest, preprocess, corrupt and graph in one run");
  pipeline->add_option("--input", opts.input, "Turn records (JSON lines)");
  pipeline->add_option("--summaries", opts.summaries, "Summary records");
  pipeline->add_option("--output", opts.output, "Output directory");
  auto* pseed_opt = pipeline->add_option("--seed", seed, "Overrides noise.seed");
  auto* preplicas_opt = pipeline->add_option("--replicas", replicas, "Pairs per dialogue");
  add_common(pipeline);

  auto* print_config = app.add_subcommand("print-config", "Print the effective configuration with all defaults");
  print_config->add_option("--config", opts.config, "Config file to load");

  std::vector<std::string> rest(args.rbegin(), args.rend());
  if (!rest.empty()) rest.pop_back();  // program name
  try {
    app.parse(rest);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitConfigError;
  }

  if (seed_opt->count() > 0 || pseed_opt->count() > 0) opts.seed = seed;
  if (replicas_opt->count() > 0 || preplicas_opt->count() > 0) opts.replicas = replicas;

  if (ingest->parsed()) return cmd_ingest(opts, out, err);
  if (preprocess->parsed()) return cmd_preprocess(opts, out, err);
  if (corrupt->parsed()) return cmd_corrupt(opts, out, err);
  if (score->parsed()) return cmd_score(opts, out, err);
  if (graph_cmd->parsed()) return cmd_graph(opts, out, err);
  if (pipeline->parsed()) return cmd_pipeline(opts, out, err);
  if (print_config->parsed()) return cmd_print_config(opts, out, err);
  return kExitConfigError;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace hypersumm::cli
