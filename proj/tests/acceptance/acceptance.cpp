// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hypersumm/cli.hpp"
#include "hypersumm/hypersumm.hpp"
#include "oracles.hpp"

using namespace hypersumm;
namespace fs = std::filesystem;

namespace {

const std::string kSample = HYPERSUMM_SAMPLE_DIR;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string name;
  double budget_ms;  // 0 = no time limit
  std::function<Outcome()> check;
};

fs::path scratch(const std::string& name) {
  const auto p = fs::path(HYPERSUMM_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr) {
  args.insert(args.begin(), "hypersumm");
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (out_text) *out_text = out.str();
  if (code != 0) std::cerr << err.str();
  return code;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

// 1 -------------------------------------------------------------------------
Outcome rouge_identity() {
  std::mt19937_64 rng(101);
  int failures = 0;
  for (int i = 0; i < 100; ++i) {
    const auto toks = rouge::tokenize(oracle::random_sentence(rng, 2, 40));
    for (std::size_t n : {1, 2}) {
      if (rouge::rouge_n(toks, toks, n) != rouge::RougeScore{1.0, 1.0, 1.0}) ++failures;
    }
    if (rouge::rouge_l(toks, toks) != rouge::RougeScore{1.0, 1.0, 1.0}) ++failures;
  }
  return {failures == 0, "100 texts, " + std::to_string(failures) + " non-1.0 scores"};
}

// 2 -------------------------------------------------------------------------
Outcome rouge_hand_oracle() {
  const auto r = rouge::rouge_n(rouge::tokenize("the cat sat on mat"), rouge::tokenize("the cat on the mat"), 2);
  return {std::abs(r.recall - 0.25) <= 1e-9, "rouge-2 recall " + fmt("%.12f", r.recall)};
}

// 3 -------------------------------------------------------------------------
Outcome lcs_oracle() {
  std::mt19937_64 rng(103);
  int mismatches = 0;
  const int cases = 2000;
  for (int i = 0; i < cases; ++i) {
    std::vector<std::string> x, y;
    for (auto* v : {&x, &y}) {
      const std::size_t len = rng() % 11;
      for (std::size_t k = 0; k < len; ++k) v->push_back(std::string(1, static_cast<char>('a' + rng() % 3)));
    }
    if (rouge::lcs_length(x, y) != oracle::brute_force_lcs(x, y)) ++mismatches;
  }
  return {mismatches == 0, std::to_string(cases) + " pairs, " + std::to_string(mismatches) + " mismatches"};
}

// 4 -------------------------------------------------------------------------
Outcome noise_conservation() {
  std::mt19937_64 gen(104);
  int violations = 0;
  const int runs = 1000;
  for (int i = 0; i < runs; ++i) {
    NoiseConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    cfg.window_fraction = 0.3 + 0.7 * static_cast<double>(gen() % 100) / 100.0;
    const Dialogue d = oracle::random_dialogue(gen, "C" + std::to_string(i), 1, 16);

    cfg.enabled_ops = {NoiseOp::turn_merge, NoiseOp::turn_permute};
    cfg.merge_probability = static_cast<double>(gen() % 101) / 100.0;
    const auto mp = apply_window_denoise(d, cfg);
    const std::size_t produced = mp.corrupted.turns.size() - (d.turns.size() - mp.plan.window_len);
    const std::vector<Turn> window(mp.corrupted.turns.begin() + static_cast<std::ptrdiff_t>(mp.plan.window_start),
                                   mp.corrupted.turns.begin() +
                                       static_cast<std::ptrdiff_t>(mp.plan.window_start + produced));
    if (oracle::token_multiset(window) != oracle::token_multiset(mp.reconstruction_target.turns)) ++violations;

    cfg.enabled_ops = {NoiseOp::speaker_mask};
    cfg.speaker_mask_ratio = 0.5;
    const auto sm = apply_window_denoise(d, cfg);
    std::size_t masked = 0;
    for (const auto& t : sm.corrupted.turns) masked += t.speaker == kMaskSpeaker;
    const auto expect = static_cast<std::size_t>(std::llround(0.5 * static_cast<double>(sm.plan.window_len)));
    if (masked != expect) ++violations;
    for (std::size_t k = 0; k < d.turns.size(); ++k) {
      if (sm.corrupted.turns[k].text != d.turns[k].text) ++violations;
    }
  }
  return {violations == 0, std::to_string(runs) + " runs, " + std::to_string(violations) + " violations"};
}

// 5 -------------------------------------------------------------------------
Outcome infill_statistics() {
  std::vector<Turn> window;
  for (std::size_t i = 0; i < 100; ++i) {
    Turn t;
    t.interview_id = "W";
    t.turn_index = i;
    t.speaker = "S";
    for (int k = 0; k < 100; ++k) t.text += (k ? " w" : "w") + std::to_string(k);
    window.push_back(std::move(t));
  }
  const NoiseConfig cfg;
  double sum = 0;
  std::size_t spans = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(derive_stream_seed(cfg.seed, "W", seed));
    for (const auto& s : draw_text_infill(window, cfg.infill_lambda, cfg.infill_token_ratio, rng).spans) {
      sum += static_cast<double>(s.length);
      ++spans;
    }
  }
  const double mean = sum / static_cast<double>(spans);
  return {spans >= 1000 && std::abs(mean - 3.0) <= 0.2,
          std::to_string(spans) + " spans, mean " + fmt("%.4f", mean)};
}

// 6 -------------------------------------------------------------------------
Outcome corrupt_determinism() {
  const auto dir = scratch("determinism");
  for (const char* name : {"first.jsonl", "second.jsonl"}) {
    if (run_cli({"corrupt", "--input", kSample + "/interviews.jsonl", "--seed", "42", "--output",
                 (dir / name).string()}) != 0) {
      return {false, "corrupt exited non-zero"};
    }
  }
  const std::string a = oracle::read_file(dir / "first.jsonl");
  const std::string b = oracle::read_file(dir / "second.jsonl");
  const auto pairs = static_cast<std::size_t>(std::count(a.begin(), a.end(), '\n'));
  return {!a.empty() && a == b, std::to_string(pairs) + " pairs, " + std::to_string(a.size()) + " bytes, " +
                                    (a == b ? "identical" : "different")};
}

// 7 -------------------------------------------------------------------------
Outcome replay() {
  const auto dir = scratch("replay");
  if (run_cli({"corrupt", "--input", kSample + "/interviews.jsonl", "--replicas", "13", "--output",
               (dir / "pairs.jsonl").string()}) != 0) {
    return {false, "corrupt exited non-zero"};
  }
  const Corpus original = parse_corpus(oracle::read_file(kSample + "/interviews.jsonl"));
  std::istringstream in(oracle::read_file(dir / "pairs.jsonl"));
  auto pairs = parse_denoise_pairs(in);
  std::mt19937_64 rng(107);
  std::shuffle(pairs.begin(), pairs.end(), rng);
  pairs.resize(std::min<std::size_t>(pairs.size(), 100));
  int ok = 0;
  for (const auto& p : pairs) {
    const Dialogue* d = original.find(p.dialogue_id);
    if (d && replay_plan(*d, p.plan) == p.corrupted) ++ok;
  }
  return {ok == 100 && pairs.size() == 100, std::to_string(ok) + "/" + std::to_string(pairs.size()) + " replayed"};
}

// 8 -------------------------------------------------------------------------
Outcome hypertext_integrity() {
  const Corpus corpus = parse_corpus(oracle::read_file(kSample + "/interviews.jsonl"));
  std::vector<SummaryPair> sums;
  for (const auto& r : parse_summaries(oracle::read_file(kSample + "/summaries.jsonl"))) {
    sums.push_back({r.dialogue_id, build_qr_text(*corpus.find(r.dialogue_id)), r.summary});
  }
  const ToolkitConfig cfg;
  const auto g = graph::build_graph(corpus, sums, cfg.lexicon, cfg.segment_size);

  const auto dir = scratch("html");
  graph::export_html(g, dir);
  const auto dangling = oracle::dangling_links(dir);

  int chain_errors = 0;
  for (const auto& d : corpus.dialogues) {
    const auto segs = graph::segment_dialogue(d, cfg.segment_size);
    std::size_t edges_here = 0;
    for (const auto& e : g.edges) {
      if (e.kind != graph::EdgeKind::temporal_next) continue;
      const auto* src = g.find(e.src);
      if (src->source_ref->interview_id == d.interview_id) ++edges_here;
    }
    if (edges_here != segs.size() - 1) ++chain_errors;
    for (std::size_t s = 1; s < segs.size(); ++s) {
      if (!std::binary_search(g.edges.begin(), g.edges.end(),
                              graph::HyperEdge{segs[s - 1].id, segs[s].id, graph::EdgeKind::temporal_next})) {
        ++chain_errors;
      }
    }
  }

  const std::string rec = graph::export_graph_record(g);
  const bool round_trip = graph::export_graph_record(graph::parse_graph_record(rec)) == rec;
  return {dangling.empty() && chain_errors == 0 && round_trip,
          std::to_string(g.nodes.size()) + " nodes, " + std::to_string(dangling.size()) + " dangling hrefs, " +
              std::to_string(chain_errors) + " chain errors, record round-trip " + (round_trip ? "ok" : "differs")};
}

// 9 -------------------------------------------------------------------------
Outcome end_to_end() {
  const auto dir = scratch("pipeline");
  const auto start = std::chrono::steady_clock::now();
  const int code = run_cli({"pipeline", "--input", kSample + "/interviews.jsonl", "--summaries",
                            kSample + "/summaries.jsonl", "--config", kSample + "/config.ini", "--output",
                            (dir / "out").string()});
  const double pipeline_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::string table;
  const int score_code = run_cli({"score", "--candidates", kSample + "/summaries.jsonl", "--references",
                                  kSample + "/summaries.jsonl", "--output", (dir / "score.json").string()},
                                 &table);
  bool all_hundred = score_code == 0;
  if (all_hundred) {
    const auto report = json::parse(oracle::read_file(dir / "score.json"));
    for (const char* m : {"rouge-1", "rouge-2", "rouge-l"}) {
      for (const char* f : {"r", "p", "f"}) {
        all_hundred = all_hundred && fmt("%.1f", report.at(m).at(f).get<double>() * 100.0) == "100.0";
      }
    }
  }
  return {code == 0 && pipeline_s < 10.0 && all_hundred,
          "pipeline exit " + std::to_string(code) + " in " + fmt("%.2f", pipeline_s) + " s; self-score " +
              (all_hundred ? "100.0 on rouge-1/2/l" : "not 100.0")};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "ROUGE identity", 1000, rouge_identity},
      {2, "ROUGE hand oracle", 0, rouge_hand_oracle},
      {3, "LCS oracle equivalence", 10000, lcs_oracle},
      {4, "Noise conservation", 0, noise_conservation},
      {5, "Infilling statistics", 0, infill_statistics},
      {6, "Corruption determinism", 5000, corrupt_determinism},
      {7, "Plan replay", 0, replay},
      {8, "Hypertext integrity", 0, hypertext_integrity},
      {9, "End-to-end pipeline", 0, end_to_end},
  };

  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_ms == 0 || ms < c.budget_ms;
    const bool pass = o.pass && in_time;
    failed += !pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c.number << ". " << c.name << ": " << o.detail << " ("
              << fmt("%.1f", ms) << " ms" << (c.budget_ms > 0 ? ", limit " + fmt("%.0f", c.budget_ms) + " ms" : "")
              << ")\n";
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size()
            << " acceptance criteria passed\n";
  return failed == 0 ? 0 : 1;
}
