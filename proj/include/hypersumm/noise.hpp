#pragma once

// Window-based dialogue corruption for denoising pairs.
//
// Each op is split into a draw step, which consumes the random stream and
// returns a record of what it decided, and an apply step, which executes a
// record without randomness. apply_window_denoise() keeps the records as the
// plan's op trace, so replay_plan() reproduces a corruption exactly.
//
// Record positions are indices into the window as it looks when that op
// runs (after the ops before it in the trace).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hypersumm/corpus.hpp"
#include "hypersumm/random.hpp"
#include "hypersumm/text.hpp"

namespace hypersumm {

inline constexpr std::string_view kMaskToken = "[MASK]";
inline constexpr double kMaxInfillLambda = 500.0;

class NoiseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NoiseOp { speaker_mask, turn_split, turn_merge, text_infill, turn_permute };

/// The order ops are applied in, whatever order they were enabled in.
inline constexpr std::array<NoiseOp, 5> kCanonicalOpOrder = {
    NoiseOp::speaker_mask, NoiseOp::turn_split, NoiseOp::turn_merge, NoiseOp::text_infill,
    NoiseOp::turn_permute};

inline std::string_view to_string(NoiseOp op) {
  switch (op) {
    case NoiseOp::speaker_mask: return "speaker_mask";
    case NoiseOp::turn_split: return "turn_split";
    case NoiseOp::turn_merge: return "turn_merge";
    case NoiseOp::text_infill: return "text_infill";
    case NoiseOp::turn_permute: return "turn_permute";
  }
  return "";
}

inline std::optional<NoiseOp> parse_noise_op(std::string_view s) {
  for (NoiseOp op : kCanonicalOpOrder) {
    if (to_string(op) == s) return op;
  }
  return std::nullopt;
}

struct NoiseConfig {
  std::uint64_t seed = 42;
  double speaker_mask_ratio = 0.5;
  // Mask a share of distinct speakers (every occurrence) instead of a share
  // of turn occurrences.
  bool mask_distinct_speakers = false;
  double infill_lambda = 3.0;
  double infill_token_ratio = 0.15;
  double merge_probability = 0.3;
  std::size_t split_parts = 2;
  double window_fraction = 1.0;
  std::vector<NoiseOp> enabled_ops{kCanonicalOpOrder.begin(), kCanonicalOpOrder.end()};

  bool enabled(NoiseOp op) const {
    return std::find(enabled_ops.begin(), enabled_ops.end(), op) != enabled_ops.end();
  }

  void validate() const {
    auto fraction = [](double v, const char* name) {
      if (!(v >= 0.0 && v <= 1.0)) throw NoiseError(std::string(name) + " must be in [0, 1]");
    };
    fraction(speaker_mask_ratio, "speaker_mask_ratio");
    fraction(infill_token_ratio, "infill_token_ratio");
    fraction(merge_probability, "merge_probability");
    if (!(window_fraction > 0.0 && window_fraction <= 1.0)) {
      throw NoiseError("window_fraction must be in (0, 1]");
    }
    if (!(infill_lambda > 0.0 && infill_lambda <= kMaxInfillLambda)) {
      throw NoiseError("infill_lambda must be in (0, 500]");
    }
    if (split_parts < 2) throw NoiseError("split_parts must be >= 2");
    if (enabled_ops.empty()) throw NoiseError("enabled_ops must not be empty");
    std::set<NoiseOp> seen(enabled_ops.begin(), enabled_ops.end());
    if (seen.size() != enabled_ops.size()) throw NoiseError("enabled_ops lists an op twice");
  }
};

// ---------------------------------------------------------------------------
// Op records

struct SpeakerMaskRecord {
  std::vector<std::size_t> positions;  // ascending
  bool operator==(const SpeakerMaskRecord&) const = default;
};

struct TurnSplitRecord {
  std::size_t position = 0;
  std::vector<std::size_t> cuts;  // token offsets, ascending; empty = no split
  bool operator==(const TurnSplitRecord&) const = default;
};

struct TurnMergeRecord {
  std::vector<std::size_t> merged;  // positions folded into the turn before them
  bool operator==(const TurnMergeRecord&) const = default;
};

struct InfillSpan {
  std::size_t position = 0;  // turn within the window
  std::size_t start = 0;     // first token
  std::size_t length = 0;
  bool operator==(const InfillSpan&) const = default;
};

struct TextInfillRecord {
  std::vector<InfillSpan> spans;  // in draw order
  bool operator==(const TextInfillRecord&) const = default;
};

struct TurnPermuteRecord {
  std::vector<std::size_t> order;  // output k takes input order[k]
  bool operator==(const TurnPermuteRecord&) const = default;
};

using OpRecord =
    std::variant<SpeakerMaskRecord, TurnSplitRecord, TurnMergeRecord, TextInfillRecord, TurnPermuteRecord>;

inline NoiseOp op_of(const OpRecord& r) {
  return std::visit(
      [](const auto& rec) {
        using T = std::decay_t<decltype(rec)>;
        if constexpr (std::is_same_v<T, SpeakerMaskRecord>) return NoiseOp::speaker_mask;
        else if constexpr (std::is_same_v<T, TurnSplitRecord>) return NoiseOp::turn_split;
        else if constexpr (std::is_same_v<T, TurnMergeRecord>) return NoiseOp::turn_merge;
        else if constexpr (std::is_same_v<T, TextInfillRecord>) return NoiseOp::text_infill;
        else return NoiseOp::turn_permute;
      },
      r);
}

struct CorruptionPlan {
  std::size_t window_start = 0;
  std::size_t window_len = 0;
  std::uint64_t replica = 0;
  std::uint64_t stream_seed = 0;
  std::vector<OpRecord> op_trace;
  bool operator==(const CorruptionPlan&) const = default;
};

struct DenoisePair {
  std::string dialogue_id;
  Dialogue corrupted;
  Dialogue reconstruction_target;
  CorruptionPlan plan;
  bool operator==(const DenoisePair&) const = default;
};

namespace detail {

inline void renumber(std::vector<Turn>& turns, std::size_t base = 0) {
  for (std::size_t i = 0; i < turns.size(); ++i) turns[i].turn_index = base + i;
}

inline std::size_t base_index(const std::vector<Turn>& turns) {
  return turns.empty() ? 0 : turns.front().turn_index;
}

inline void check_position(std::size_t pos, std::size_t size, const char* op) {
  if (pos >= size) {
    throw NoiseError(std::string(op) + ": position " + std::to_string(pos) + " outside window of " +
                     std::to_string(size));
  }
}

inline bool ends_sentence(const std::string& token) {
  std::u32string cps = text::decode_utf8(token);
  static constexpr std::u32string_view kClosers = U"\"')]}”’»";
  while (!cps.empty() && kClosers.find(cps.back()) != std::u32string_view::npos) cps.pop_back();
  if (cps.empty()) return false;
  const char32_t c = cps.back();
  return c == U'.' || c == U'?' || c == U'!' || c == 0x2026;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Window selection

struct Window {
  std::size_t start = 0;
  std::size_t len = 0;
  bool operator==(const Window&) const = default;
};

inline std::size_t window_length(std::size_t turn_count, double fraction) {
  const auto len = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(turn_count)));
  return std::clamp<std::size_t>(len, 1, std::max<std::size_t>(turn_count, 1));
}

/// Window length is max(1, round(fraction * turns)); the start is uniform over
/// the positions where the window fits.
inline Window select_window(const Dialogue& dialogue, const NoiseConfig& cfg, Rng& rng) {
  if (dialogue.turns.empty()) throw NoiseError("cannot select a window in an empty dialogue");
  const std::size_t n = dialogue.turns.size();
  const std::size_t len = window_length(n, cfg.window_fraction);
  const std::size_t start = rng.uniform_below(n - len + 1);
  return {start, len};
}

// ---------------------------------------------------------------------------
// Speaker masking

inline SpeakerMaskRecord draw_speaker_mask(const std::vector<Turn>& window, double ratio, Rng& rng,
                                           bool distinct_speakers = false) {
  SpeakerMaskRecord rec;
  auto partial_shuffle = [&rng](std::vector<std::size_t>& items, std::size_t count) {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + rng.uniform_below(items.size() - i);
      std::swap(items[i], items[j]);
    }
  };
  if (!distinct_speakers) {
    const std::size_t n = window.size();
    const auto count = std::min<std::size_t>(
        n, static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n))));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    partial_shuffle(idx, count);
    rec.positions.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count));
  } else {
    std::vector<std::string> speakers;  // first-appearance order
    for (const auto& t : window) {
      if (t.speaker != kMaskSpeaker && std::find(speakers.begin(), speakers.end(), t.speaker) == speakers.end()) {
        speakers.push_back(t.speaker);
      }
    }
    const auto count = std::min<std::size_t>(
        speakers.size(), static_cast<std::size_t>(std::llround(ratio * static_cast<double>(speakers.size()))));
    std::vector<std::size_t> idx(speakers.size());
    std::iota(idx.begin(), idx.end(), 0);
    partial_shuffle(idx, count);
    std::set<std::string> chosen;
    for (std::size_t i = 0; i < count; ++i) chosen.insert(speakers[idx[i]]);
    for (std::size_t i = 0; i < window.size(); ++i) {
      if (chosen.count(window[i].speaker)) rec.positions.push_back(i);
    }
  }
  std::sort(rec.positions.begin(), rec.positions.end());
  return rec;
}

inline std::vector<Turn> apply_speaker_mask(std::vector<Turn> window, const SpeakerMaskRecord& rec) {
  for (std::size_t pos : rec.positions) {
    detail::check_position(pos, window.size(), "speaker_mask");
    window[pos].speaker = std::string(kMaskSpeaker);
  }
  return window;
}

/// Masks exactly round(ratio * window size) speakers, chosen without
/// replacement. Texts are untouched.
inline std::vector<Turn> speaker_mask(std::vector<Turn> window, double ratio, Rng& rng) {
  const auto rec = draw_speaker_mask(window, ratio, rng);
  return apply_speaker_mask(std::move(window), rec);
}

// ---------------------------------------------------------------------------
// Turn splitting

/// Picks the longest turn (code points, ties to the lowest position) and cut
/// points near equal-length positions, preferring sentence boundaries.
/// Consumes no randomness.
inline TurnSplitRecord draw_turn_split(const std::vector<Turn>& window, std::size_t parts) {
  TurnSplitRecord rec;
  std::size_t best_len = 0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    const std::size_t len = text::char_count(window[i].text);
    if (i == 0 || len > best_len) {
      best_len = len;
      rec.position = i;
    }
  }
  if (window.empty()) return rec;

  const auto tokens = text::split_whitespace(window[rec.position].text);
  const std::size_t n = tokens.size();
  const std::size_t k_parts = std::min(parts, n);
  if (k_parts < 2) return rec;

  // offset[b] = start of token b in the single-space joined text
  std::vector<double> offset(n + 1, 0.0);
  for (std::size_t b = 1; b <= n; ++b) {
    offset[b] = offset[b - 1] + static_cast<double>(text::char_count(tokens[b - 1])) + 1.0;
  }
  const double total = offset[n] - 1.0;

  std::size_t prev = 0;
  for (std::size_t k = 1; k < k_parts; ++k) {
    const double ideal = total * static_cast<double>(k) / static_cast<double>(k_parts);
    const std::size_t lo = prev + 1;
    const std::size_t hi = n - (k_parts - k);  // leave one token per remaining part
    std::optional<std::size_t> best;
    auto consider = [&](bool sentence_only) {
      for (std::size_t b = lo; b <= hi; ++b) {
        if (sentence_only && !detail::ends_sentence(tokens[b - 1])) continue;
        if (!best || std::abs(offset[b] - ideal) < std::abs(offset[*best] - ideal)) best = b;
      }
    };
    consider(true);
    if (!best) consider(false);
    rec.cuts.push_back(*best);
    prev = *best;
  }
  return rec;
}

inline std::vector<Turn> apply_turn_split(std::vector<Turn> window, const TurnSplitRecord& rec) {
  if (rec.cuts.empty()) return window;
  detail::check_position(rec.position, window.size(), "turn_split");
  const std::size_t base = detail::base_index(window);
  const Turn original = window[rec.position];
  const auto tokens = text::split_whitespace(original.text);
  std::vector<std::size_t> bounds;
  bounds.push_back(0);
  for (std::size_t c : rec.cuts) {
    if (c <= bounds.back() || c >= tokens.size()) throw NoiseError("turn_split: invalid cut points");
    bounds.push_back(c);
  }
  bounds.push_back(tokens.size());

  std::vector<Turn> fragments;
  for (std::size_t f = 0; f + 1 < bounds.size(); ++f) {
    Turn frag = original;
    std::vector<std::string> part(tokens.begin() + static_cast<std::ptrdiff_t>(bounds[f]),
                                  tokens.begin() + static_cast<std::ptrdiff_t>(bounds[f + 1]));
    frag.text = text::join(part, " ");
    if (f > 0) frag.speaker = std::string(kMaskSpeaker);
    fragments.push_back(std::move(frag));
  }
  const auto at = window.begin() + static_cast<std::ptrdiff_t>(rec.position);
  window.erase(at);
  window.insert(window.begin() + static_cast<std::ptrdiff_t>(rec.position), fragments.begin(), fragments.end());
  detail::renumber(window, base);
  return window;
}

/// Replaces the longest turn by `parts` fragments; fragments after the first
/// carry the mask speaker. Turns with fewer tokens than `parts` are split
/// into one fragment per token.
inline std::vector<Turn> split_longest_turn(std::vector<Turn> window, std::size_t parts, Rng& /*rng*/) {
  if (parts < 2) throw NoiseError("split_parts must be >= 2");
  const auto rec = draw_turn_split(window, parts);
  return apply_turn_split(std::move(window), rec);
}

// ---------------------------------------------------------------------------
// Turn merging

inline TurnMergeRecord draw_turn_merge(const std::vector<Turn>& window, double p, Rng& rng) {
  TurnMergeRecord rec;
  for (std::size_t j = 1; j < window.size(); ++j) {
    if (rng.bernoulli(p)) rec.merged.push_back(j);
  }
  return rec;
}

inline std::vector<Turn> apply_turn_merge(const std::vector<Turn>& window, const TurnMergeRecord& rec) {
  const std::set<std::size_t> merged(rec.merged.begin(), rec.merged.end());
  for (std::size_t j : merged) {
    if (j == 0) throw NoiseError("turn_merge: position 0 has no predecessor");
    detail::check_position(j, window.size(), "turn_merge");
  }
  std::vector<Turn> out;
  for (std::size_t j = 0; j < window.size(); ++j) {
    if (merged.count(j)) {
      Turn& left = out.back();
      left.text += " ";
      left.text += window[j].text;
      left.tags.insert(window[j].tags.begin(), window[j].tags.end());
    } else {
      out.push_back(window[j]);
    }
  }
  detail::renumber(out, detail::base_index(window));
  return out;
}

/// Left-to-right scan; each adjacent pair merges with probability p, and a
/// merged turn may keep absorbing its next neighbour. The left speaker wins.
inline std::vector<Turn> merge_turns(const std::vector<Turn>& window, double p, Rng& rng) {
  const auto rec = draw_turn_merge(window, p, rng);
  return apply_turn_merge(window, rec);
}

// ---------------------------------------------------------------------------
// Text infilling

/// Draws span lengths from Poisson(lambda), clamped to >= 1, and places each
/// span uniformly among the positions where it fits inside one turn without
/// overlapping earlier spans. When no such position exists the span shrinks
/// to the longest unmasked run. Stops once the masked share reaches
/// token_ratio or nothing is left to mask.
inline TextInfillRecord draw_text_infill(const std::vector<Turn>& window, double lambda, double token_ratio,
                                         Rng& rng) {
  TextInfillRecord rec;
  struct Run {
    std::size_t position, start, length;
  };
  std::vector<Run> runs;
  std::size_t total = 0;
  for (std::size_t i = 0; i < window.size(); ++i) {
    const std::size_t n = text::split_whitespace(window[i].text).size();
    if (n > 0) runs.push_back({i, 0, n});
    total += n;
  }
  const double target = token_ratio * static_cast<double>(total);
  std::size_t masked = 0;

  auto fits = [&runs](std::size_t len) {
    std::uint64_t count = 0;
    for (const auto& r : runs) {
      if (r.length >= len) count += r.length - len + 1;
    }
    return count;
  };

  while (static_cast<double>(masked) < target && !runs.empty()) {
    std::size_t len = std::max<std::uint64_t>(1, rng.poisson(lambda));
    std::uint64_t count = fits(len);
    if (count == 0) {
      len = 0;
      for (const auto& r : runs) len = std::max(len, r.length);
      count = fits(len);
    }
    std::uint64_t pick = rng.uniform_below(count);
    std::size_t ri = 0;
    for (; ri < runs.size(); ++ri) {
      const Run& r = runs[ri];
      if (r.length < len) continue;
      const std::uint64_t here = r.length - len + 1;
      if (pick < here) break;
      pick -= here;
    }
    const Run run = runs[ri];
    const std::size_t start = run.start + static_cast<std::size_t>(pick);
    rec.spans.push_back({run.position, start, len});
    masked += len;

    // carve the span out of its run
    std::vector<Run> pieces;
    if (start > run.start) pieces.push_back({run.position, run.start, start - run.start});
    const std::size_t end = start + len;
    if (end < run.start + run.length) pieces.push_back({run.position, end, run.start + run.length - end});
    runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(ri));
    runs.insert(runs.begin() + static_cast<std::ptrdiff_t>(ri), pieces.begin(), pieces.end());
  }
  return rec;
}

inline std::vector<Turn> apply_text_infill(std::vector<Turn> window, const TextInfillRecord& rec) {
  std::vector<std::vector<InfillSpan>> by_turn(window.size());
  for (const auto& s : rec.spans) {
    detail::check_position(s.position, window.size(), "text_infill");
    by_turn[s.position].push_back(s);
  }
  for (std::size_t i = 0; i < window.size(); ++i) {
    auto& spans = by_turn[i];
    if (spans.empty()) continue;
    std::sort(spans.begin(), spans.end(),
              [](const InfillSpan& a, const InfillSpan& b) { return a.start < b.start; });
    const auto tokens = text::split_whitespace(window[i].text);
    std::vector<std::string> out;
    std::size_t cursor = 0;
    for (const auto& s : spans) {
      if (s.length == 0 || s.start < cursor || s.start + s.length > tokens.size()) {
        throw NoiseError("text_infill: span outside turn or overlapping another span");
      }
      out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(cursor),
                 tokens.begin() + static_cast<std::ptrdiff_t>(s.start));
      out.emplace_back(kMaskToken);
      cursor = s.start + s.length;
    }
    out.insert(out.end(), tokens.begin() + static_cast<std::ptrdiff_t>(cursor), tokens.end());
    window[i].text = text::join(out, " ");
  }
  return window;
}

/// Replaces token spans with a single "[MASK]"; spans stay inside one turn.
inline std::vector<Turn> infill_text(std::vector<Turn> window, double lambda, double token_ratio, Rng& rng) {
  const auto rec = draw_text_infill(window, lambda, token_ratio, rng);
  return apply_text_infill(std::move(window), rec);
}

// ---------------------------------------------------------------------------
// Turn permutation

/// Fisher-Yates over the seeded stream.
inline TurnPermuteRecord draw_turn_permute(const std::vector<Turn>& window, Rng& rng) {
  TurnPermuteRecord rec;
  rec.order.resize(window.size());
  std::iota(rec.order.begin(), rec.order.end(), 0);
  for (std::size_t i = window.size(); i > 1; --i) {
    const std::size_t j = rng.uniform_below(i);
    std::swap(rec.order[i - 1], rec.order[j]);
  }
  return rec;
}

inline std::vector<Turn> apply_turn_permute(const std::vector<Turn>& window, const TurnPermuteRecord& rec) {
  if (rec.order.size() != window.size()) throw NoiseError("turn_permute: order length does not match window");
  std::vector<bool> used(window.size(), false);
  std::vector<Turn> out;
  out.reserve(window.size());
  for (std::size_t src : rec.order) {
    detail::check_position(src, window.size(), "turn_permute");
    if (used[src]) throw NoiseError("turn_permute: order is not a permutation");
    used[src] = true;
    out.push_back(window[src]);
  }
  detail::renumber(out, detail::base_index(window));
  return out;
}

inline std::vector<Turn> permute_turns(const std::vector<Turn>& window, Rng& rng) {
  const auto rec = draw_turn_permute(window, rng);
  return apply_turn_permute(window, rec);
}

// ---------------------------------------------------------------------------
// Composition

inline std::vector<Turn> apply_record(std::vector<Turn> window, const OpRecord& rec) {
  return std::visit(
      [&window](const auto& r) -> std::vector<Turn> {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, SpeakerMaskRecord>) return apply_speaker_mask(std::move(window), r);
        else if constexpr (std::is_same_v<T, TurnSplitRecord>) return apply_turn_split(std::move(window), r);
        else if constexpr (std::is_same_v<T, TurnMergeRecord>) return apply_turn_merge(window, r);
        else if constexpr (std::is_same_v<T, TextInfillRecord>) return apply_text_infill(std::move(window), r);
        else return apply_turn_permute(window, r);
      },
      rec);
}

namespace detail {

inline Dialogue splice_window(const Dialogue& dialogue, std::size_t start, std::size_t len,
                              std::vector<Turn> replacement) {
  Dialogue out;
  out.interview_id = dialogue.interview_id;
  const auto first = dialogue.turns.begin();
  out.turns.assign(first, first + static_cast<std::ptrdiff_t>(start));
  out.turns.insert(out.turns.end(), std::make_move_iterator(replacement.begin()),
                   std::make_move_iterator(replacement.end()));
  out.turns.insert(out.turns.end(), first + static_cast<std::ptrdiff_t>(start + len), dialogue.turns.end());
  renumber(out.turns);
  return out;
}

inline std::vector<Turn> slice(const Dialogue& d, std::size_t start, std::size_t len) {
  return {d.turns.begin() + static_cast<std::ptrdiff_t>(start),
          d.turns.begin() + static_cast<std::ptrdiff_t>(start + len)};
}

}  // namespace detail

/// Selects a window, runs the enabled ops in canonical order over it and
/// returns the corrupted dialogue, the pristine window and the op trace.
/// Turns outside the window keep their content; only indices after the
/// window shift when the window changed length.
inline DenoisePair apply_window_denoise(const Dialogue& dialogue, const NoiseConfig& cfg,
                                        std::uint64_t replica = 0) {
  cfg.validate();
  validate_dialogue(dialogue);

  DenoisePair pair;
  pair.dialogue_id = dialogue.interview_id;
  pair.plan.replica = replica;
  pair.plan.stream_seed = derive_stream_seed(cfg.seed, dialogue.interview_id, replica);
  Rng rng(pair.plan.stream_seed);

  const Window w = select_window(dialogue, cfg, rng);
  pair.plan.window_start = w.start;
  pair.plan.window_len = w.len;

  std::vector<Turn> window = detail::slice(dialogue, w.start, w.len);
  for (NoiseOp op : kCanonicalOpOrder) {
    if (!cfg.enabled(op)) continue;
    OpRecord rec;
    switch (op) {
      case NoiseOp::speaker_mask:
        rec = draw_speaker_mask(window, cfg.speaker_mask_ratio, rng, cfg.mask_distinct_speakers);
        break;
      case NoiseOp::turn_split:
        rec = draw_turn_split(window, cfg.split_parts);
        break;
      case NoiseOp::turn_merge:
        rec = draw_turn_merge(window, cfg.merge_probability, rng);
        break;
      case NoiseOp::text_infill:
        rec = draw_text_infill(window, cfg.infill_lambda, cfg.infill_token_ratio, rng);
        break;
      case NoiseOp::turn_permute:
        rec = draw_turn_permute(window, rng);
        break;
    }
    window = apply_record(std::move(window), rec);
    pair.plan.op_trace.push_back(std::move(rec));
  }

  pair.corrupted = detail::splice_window(dialogue, w.start, w.len, std::move(window));
  pair.reconstruction_target.interview_id = dialogue.interview_id;
  pair.reconstruction_target.turns = detail::slice(dialogue, w.start, w.len);
  detail::renumber(pair.reconstruction_target.turns);
  return pair;
}

/// Re-executes a plan's op trace on the original dialogue, without using
/// any randomness.
inline Dialogue replay_plan(const Dialogue& dialogue, const CorruptionPlan& plan) {
  if (plan.window_len == 0 || plan.window_start + plan.window_len > dialogue.turns.size()) {
    throw NoiseError("plan window does not fit dialogue " + dialogue.interview_id);
  }
  std::vector<Turn> window = detail::slice(dialogue, plan.window_start, plan.window_len);
  for (const auto& rec : plan.op_trace) window = apply_record(std::move(window), rec);
  return detail::splice_window(dialogue, plan.window_start, plan.window_len, std::move(window));
}

// ---------------------------------------------------------------------------
// DenoisePair records:
//   {"dialogue_id", "plan", "corrupted": [turn records], "target": [turn records]}

inline ordered_json op_record_to_json(const OpRecord& rec) {
  ordered_json j;
  j["op"] = to_string(op_of(rec));
  std::visit(
      [&j](const auto& r) {
        using T = std::decay_t<decltype(r)>;
        if constexpr (std::is_same_v<T, SpeakerMaskRecord>) {
          j["positions"] = r.positions;
        } else if constexpr (std::is_same_v<T, TurnSplitRecord>) {
          j["position"] = r.position;
          j["cuts"] = r.cuts;
        } else if constexpr (std::is_same_v<T, TurnMergeRecord>) {
          j["merged"] = r.merged;
        } else if constexpr (std::is_same_v<T, TextInfillRecord>) {
          ordered_json spans = ordered_json::array();
          for (const auto& s : r.spans) spans.push_back({s.position, s.start, s.length});
          j["spans"] = std::move(spans);
        } else {
          j["order"] = r.order;
        }
      },
      rec);
  return j;
}

inline OpRecord op_record_from_json(const json& j) {
  try {
    const auto op = parse_noise_op(j.at("op").get<std::string>());
    if (!op) throw NoiseError("unknown op \"" + j.at("op").get<std::string>() + "\"");
    using Indices = std::vector<std::size_t>;
    switch (*op) {
      case NoiseOp::speaker_mask:
        return SpeakerMaskRecord{j.at("positions").get<Indices>()};
      case NoiseOp::turn_split:
        return TurnSplitRecord{j.at("position").get<std::size_t>(), j.at("cuts").get<Indices>()};
      case NoiseOp::turn_merge:
        return TurnMergeRecord{j.at("merged").get<Indices>()};
      case NoiseOp::text_infill: {
        TextInfillRecord r;
        for (const auto& s : j.at("spans")) {
          if (!s.is_array() || s.size() != 3) throw NoiseError("infill span must be [position, start, length]");
          r.spans.push_back({s[0].get<std::size_t>(), s[1].get<std::size_t>(), s[2].get<std::size_t>()});
        }
        return r;
      }
      case NoiseOp::turn_permute:
        return TurnPermuteRecord{j.at("order").get<Indices>()};
    }
  } catch (const json::exception& e) {
    throw NoiseError(std::string("malformed op record: ") + e.what());
  }
  throw NoiseError("malformed op record");
}

inline ordered_json plan_to_json(const CorruptionPlan& plan) {
  ordered_json j;
  j["window_start"] = plan.window_start;
  j["window_len"] = plan.window_len;
  j["replica"] = plan.replica;
  j["stream_seed"] = plan.stream_seed;
  ordered_json trace = ordered_json::array();
  for (const auto& rec : plan.op_trace) trace.push_back(op_record_to_json(rec));
  j["op_trace"] = std::move(trace);
  return j;
}

inline CorruptionPlan plan_from_json(const json& j) {
  CorruptionPlan plan;
  try {
    plan.window_start = j.at("window_start").get<std::size_t>();
    plan.window_len = j.at("window_len").get<std::size_t>();
    plan.replica = j.value("replica", std::uint64_t{0});
    plan.stream_seed = j.value("stream_seed", std::uint64_t{0});
    for (const auto& rec : j.at("op_trace")) plan.op_trace.push_back(op_record_from_json(rec));
  } catch (const json::exception& e) {
    throw NoiseError(std::string("malformed plan: ") + e.what());
  }
  return plan;
}

inline ordered_json denoise_pair_to_json(const DenoisePair& pair) {
  ordered_json j;
  j["dialogue_id"] = pair.dialogue_id;
  j["plan"] = plan_to_json(pair.plan);
  ordered_json corrupted = ordered_json::array();
  for (const auto& t : pair.corrupted.turns) corrupted.push_back(turn_to_json(t));
  ordered_json target = ordered_json::array();
  for (const auto& t : pair.reconstruction_target.turns) target.push_back(turn_to_json(t));
  j["corrupted"] = std::move(corrupted);
  j["target"] = std::move(target);
  return j;
}

inline DenoisePair denoise_pair_from_json(const json& j) {
  DenoisePair pair;
  try {
    pair.dialogue_id = j.at("dialogue_id").get<std::string>();
    pair.plan = plan_from_json(j.at("plan"));
    pair.corrupted.interview_id = pair.dialogue_id;
    for (const auto& t : j.at("corrupted")) pair.corrupted.turns.push_back(turn_from_json(t));
    pair.reconstruction_target.interview_id = pair.dialogue_id;
    for (const auto& t : j.at("target")) pair.reconstruction_target.turns.push_back(turn_from_json(t));
  } catch (const json::exception& e) {
    throw NoiseError(std::string("malformed denoise pair: ") + e.what());
  } catch (const CorpusError& e) {
    throw NoiseError(std::string("malformed denoise pair: ") + e.what());
  }
  return pair;
}

/// Reads line-delimited DenoisePair records.
inline std::vector<DenoisePair> parse_denoise_pairs(std::istream& in) {
  std::vector<DenoisePair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(denoise_pair_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw NoiseError("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const NoiseError& e) {
      throw NoiseError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace hypersumm
