#pragma once

// ROUGE-N and ROUGE-L.
//
// ROUGE-N recall is the clipped n-gram overlap divided by the number of
// reference n-grams; precision divides the same overlap by the number of
// candidate n-grams. ROUGE-L uses the longest common subsequence length in
// place of the overlap. Tokens are lowercased words; punctuation separates
// tokens and is dropped. No stemming, no stopword removal.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hypersumm/corpus.hpp"
#include "hypersumm/text.hpp"

namespace hypersumm::rouge {

class RougeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TokenSeq {
  std::vector<std::string> tokens;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  bool operator==(const TokenSeq&) const = default;
};

using NGram = std::vector<std::string>;

struct NGramMultiset {
  std::size_t n = 1;
  std::map<NGram, std::size_t> counts;

  std::size_t total() const {
    std::size_t t = 0;
    for (const auto& [gram, c] : counts) t += c;
    return t;
  }
};

struct RougeScore {
  double recall = 0.0;
  double precision = 0.0;
  double f1 = 0.0;

  static RougeScore from_ratio(double recall, double precision) {
    RougeScore s{recall, precision, 0.0};
    if (recall + precision > 0.0) s.f1 = 2.0 * recall * precision / (recall + precision);
    return s;
  }

  bool operator==(const RougeScore&) const = default;
};

enum class MultiReference {
  pooled,  // sum counts over all references
  best,    // score against each reference, keep the highest recall
};

/// Lowercase, split on whitespace and punctuation, drop punctuation.
inline TokenSeq tokenize(std::string_view input) {
  TokenSeq seq;
  std::u32string cur;
  for (char32_t c : text::decode_utf8(input)) {
    if (text::is_space(c) || text::is_punct(c)) {
      if (!cur.empty()) {
        seq.tokens.push_back(text::encode_utf8(cur));
        cur.clear();
      }
      continue;
    }
    cur.push_back(text::to_lower(c));
  }
  if (!cur.empty()) seq.tokens.push_back(text::encode_utf8(cur));
  return seq;
}

inline NGramMultiset count_ngrams(const TokenSeq& seq, std::size_t n) {
  if (n == 0) throw RougeError("n-gram order must be >= 1");
  NGramMultiset out;
  out.n = n;
  if (seq.size() < n) return out;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) {
    NGram gram(seq.tokens.begin() + static_cast<std::ptrdiff_t>(i),
               seq.tokens.begin() + static_cast<std::ptrdiff_t>(i + n));
    ++out.counts[std::move(gram)];
  }
  return out;
}

/// Σ over reference grams of min(reference count, candidate count).
inline std::size_t clipped_overlap(const NGramMultiset& candidate, const NGramMultiset& reference) {
  std::size_t overlap = 0;
  for (const auto& [gram, ref_count] : reference.counts) {
    auto it = candidate.counts.find(gram);
    if (it != candidate.counts.end()) overlap += std::min(ref_count, it->second);
  }
  return overlap;
}

namespace detail {

inline double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace detail

inline RougeScore rouge_n(const TokenSeq& candidate, std::span<const TokenSeq> references, std::size_t n,
                          MultiReference mode = MultiReference::pooled) {
  if (references.empty()) throw RougeError("rouge_n needs at least one reference");
  if (n == 0) throw RougeError("n-gram order must be >= 1");
  const NGramMultiset cand = count_ngrams(candidate, n);
  const std::size_t cand_total = cand.total();

  if (mode == MultiReference::best) {
    RougeScore best;
    bool first = true;
    for (const auto& ref_seq : references) {
      const NGramMultiset ref = count_ngrams(ref_seq, n);
      const std::size_t overlap = clipped_overlap(cand, ref);
      const auto s = RougeScore::from_ratio(detail::ratio(overlap, ref.total()), detail::ratio(overlap, cand_total));
      if (first || s.recall > best.recall || (s.recall == best.recall && s.f1 > best.f1)) best = s;
      first = false;
    }
    return best;
  }

  // Pooled: each reference contributes its own clipped overlap; the candidate
  // is counted once per reference so precision stays in [0, 1].
  std::size_t overlap = 0;
  std::size_t ref_total = 0;
  for (const auto& ref_seq : references) {
    const NGramMultiset ref = count_ngrams(ref_seq, n);
    overlap += clipped_overlap(cand, ref);
    ref_total += ref.total();
  }
  return RougeScore::from_ratio(detail::ratio(overlap, ref_total),
                                detail::ratio(overlap, cand_total * references.size()));
}

inline RougeScore rouge_n(const TokenSeq& candidate, const TokenSeq& reference, std::size_t n) {
  return rouge_n(candidate, std::span<const TokenSeq>(&reference, 1), n);
}

/// Longest common subsequence length. O(|x|·|y|) time, one row of
/// min(|x|, |y|) + 1 cells.
inline std::size_t lcs_length(std::span<const std::string> x, std::span<const std::string> y) {
  if (x.size() < y.size()) std::swap(x, y);  // y is the shorter one
  std::vector<std::size_t> row(y.size() + 1, 0);
  for (const auto& xi : x) {
    std::size_t diag = 0;  // row[j-1] from the previous iteration
    for (std::size_t j = 1; j <= y.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = (xi == y[j - 1]) ? diag + 1 : std::max(row[j], row[j - 1]);
      diag = up;
    }
  }
  return row[y.size()];
}

inline std::size_t lcs_length(const TokenSeq& x, const TokenSeq& y) { return lcs_length(x.tokens, y.tokens); }

inline RougeScore rouge_l(const TokenSeq& candidate, const TokenSeq& reference) {
  const std::size_t lcs = lcs_length(candidate, reference);
  return RougeScore::from_ratio(detail::ratio(lcs, reference.size()), detail::ratio(lcs, candidate.size()));
}

inline std::string metric_name(std::size_t n) { return "rouge-" + std::to_string(n); }
inline constexpr std::string_view kRougeL = "rouge-l";

using ScoreReport = std::map<std::string, RougeScore>;

/// ROUGE-L against several references. Pooled sums LCS lengths and
/// reference lengths over references, mirroring rouge_n; best keeps the
/// highest-recall reference.
inline RougeScore rouge_l(const TokenSeq& candidate, std::span<const TokenSeq> references,
                          MultiReference mode = MultiReference::pooled) {
  if (references.empty()) throw RougeError("rouge_l needs at least one reference");
  if (mode == MultiReference::best) {
    RougeScore best;
    bool first = true;
    for (const auto& ref : references) {
      const auto s = rouge_l(candidate, ref);
      if (first || s.recall > best.recall || (s.recall == best.recall && s.f1 > best.f1)) best = s;
      first = false;
    }
    return best;
  }
  std::size_t lcs = 0;
  std::size_t ref_total = 0;
  for (const auto& ref : references) {
    lcs += lcs_length(candidate, ref);
    ref_total += ref.size();
  }
  return RougeScore::from_ratio(detail::ratio(lcs, ref_total),
                                detail::ratio(lcs, candidate.size() * references.size()));
}

/// A candidate text with one or more reference texts.
struct ScoringItem {
  std::string candidate;
  std::vector<std::string> references;
};

/// Scores every item and macro-averages each field over items.
/// Keys are "rouge-<n>" for every n in `ns`, plus "rouge-l".
inline ScoreReport score_items(std::span<const ScoringItem> items, const std::set<std::size_t>& ns,
                               MultiReference mode = MultiReference::pooled) {
  if (items.empty()) throw RougeError("score_corpus needs at least one pair");
  for (std::size_t n : ns) {
    if (n == 0) throw RougeError("n-gram order must be >= 1");
  }
  ScoreReport sums;
  auto accumulate = [&sums](const std::string& key, const RougeScore& s) {
    auto& acc = sums[key];
    acc.recall += s.recall;
    acc.precision += s.precision;
    acc.f1 += s.f1;
  };
  for (const auto& item : items) {
    if (item.references.empty()) throw RougeError("scoring item without references");
    const TokenSeq cand = tokenize(item.candidate);
    std::vector<TokenSeq> refs;
    for (const auto& r : item.references) refs.push_back(tokenize(r));
    for (std::size_t n : ns) accumulate(metric_name(n), rouge_n(cand, refs, n, mode));
    accumulate(std::string(kRougeL), rouge_l(cand, refs, mode));
  }
  const auto count = static_cast<double>(items.size());
  for (auto& [key, s] : sums) {
    s.recall /= count;
    s.precision /= count;
    s.f1 /= count;
  }
  return sums;
}

/// Scores every (candidate, reference) pair and macro-averages each field.
inline ScoreReport score_corpus(std::span<const std::pair<std::string, std::string>> pairs,
                                const std::set<std::size_t>& ns) {
  if (pairs.empty()) throw RougeError("score_corpus needs at least one pair");
  std::vector<ScoringItem> items;
  items.reserve(pairs.size());
  for (const auto& [cand, ref] : pairs) items.push_back({cand, {ref}});
  return score_items(items, ns);
}

/// {"rouge-1": {"r","p","f"}, ..., "rouge-l": {...}, "pairs": count}
inline ordered_json report_to_json(const ScoreReport& report, std::size_t pairs) {
  ordered_json j;
  // numeric order for rouge-n, then rouge-l
  std::vector<std::pair<std::size_t, std::string>> ordered;
  for (const auto& [key, s] : report) {
    if (key == kRougeL) continue;
    ordered.emplace_back(std::stoul(key.substr(6)), key);
  }
  std::sort(ordered.begin(), ordered.end());
  if (report.count(std::string(kRougeL))) ordered.emplace_back(SIZE_MAX, std::string(kRougeL));
  for (const auto& [order, key] : ordered) {
    const RougeScore& s = report.at(key);
    j[key] = {{"r", s.recall}, {"p", s.precision}, {"f", s.f1}};
  }
  j["pairs"] = pairs;
  return j;
}

}  // namespace hypersumm::rouge
