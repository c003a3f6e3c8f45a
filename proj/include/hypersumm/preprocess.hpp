#pragma once

// Translation adaptation, Q/R text construction and text cleaning.

#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hypersumm/corpus.hpp"
#include "hypersumm/text.hpp"

namespace hypersumm {

/// Maps one source text to its translation. May throw to signal failure.
using TranslateAdapter = std::function<std::string(const std::string&)>;

inline std::string identity_adapter(const std::string& s) { return s; }

class PreprocessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CleanPolicy {
  std::set<char32_t> strip_chars;
  bool collapse_whitespace = true;
  bool drop_untranslatable = false;
  std::set<std::string> untranslatable_lexicon;

  /// Punctuation-category characters the classifier knows, minus
  /// . ? ! ' and the ASCII hyphen.
  static std::set<char32_t> default_strip_chars() {
    std::set<char32_t> out;
    static constexpr std::u32string_view kKeep = U".?!'-";
    auto add_range = [&](char32_t lo, char32_t hi) {
      for (char32_t c = lo; c <= hi; ++c) {
        if (text::is_punct(c) && kKeep.find(c) == std::u32string_view::npos) out.insert(c);
      }
    };
    add_range(0x21, 0x7E);
    add_range(0xA1, 0xF7);
    add_range(0x2010, 0x205E);
    add_range(0x3001, 0x303F);
    return out;
  }

  static CleanPolicy defaults() {
    CleanPolicy p;
    p.strip_chars = default_strip_chars();
    return p;
  }

  void validate() const {
    for (char32_t c : strip_chars) {
      if (text::is_word_char(c)) {
        std::string s;
        text::append_utf8(s, c);
        throw PreprocessError("strip_chars may not contain letters or digits (got '" + s + "')");
      }
    }
  }
};

/// Runs every turn text through `adapter` and stamps `target_lang`.
/// Failures name the (interview_id, turn_index) that failed.
inline Dialogue translate_stage(const Dialogue& dialogue, const TranslateAdapter& adapter,
                                const std::string& target_lang) {
  Dialogue out = dialogue;
  for (auto& t : out.turns) {
    try {
      t.text = adapter(t.text);
    } catch (const std::exception& e) {
      throw PreprocessError("translate failed at (" + t.interview_id + "," + std::to_string(t.turn_index) +
                            "): " + e.what());
    }
    t.lang = target_lang;
  }
  return out;
}

inline std::string qr_prefix(const Turn& t) {
  switch (t.role) {
    case Role::question: return "Q: ";
    case Role::response: return "R: ";
    case Role::other: break;
  }
  return t.speaker + ": ";
}

/// Turns in order, one per line: "Q: ", "R: " or "<speaker>: " prefixes.
inline std::string build_qr_text(const std::vector<Turn>& turns) {
  std::string out;
  for (std::size_t i = 0; i < turns.size(); ++i) {
    if (i != 0) out += '\n';
    out += qr_prefix(turns[i]);
    out += turns[i].text;
  }
  return out;
}

inline std::string build_qr_text(const Dialogue& dialogue) { return build_qr_text(dialogue.turns); }

/// Strips policy characters, optionally drops lexicon tokens, collapses
/// whitespace runs and trims. Idempotent.
///
/// Dropping tokens works on whitespace-delimited tokens and rejoins the
/// survivors with single spaces, so it implies collapsing.
inline std::string clean_text(std::string_view input, const CleanPolicy& policy) {
  const std::u32string cps = text::decode_utf8(input);
  std::u32string kept;
  kept.reserve(cps.size());
  for (char32_t c : cps) {
    if (!policy.strip_chars.count(c)) kept.push_back(c);
  }

  if (policy.drop_untranslatable) {
    std::vector<std::string> tokens = text::split_whitespace(text::encode_utf8(kept));
    std::erase_if(tokens, [&](const std::string& tok) { return policy.untranslatable_lexicon.count(tok) > 0; });
    return text::join(tokens, " ");
  }

  std::u32string out;
  out.reserve(kept.size());
  bool in_space = false;
  for (char32_t c : kept) {
    if (policy.collapse_whitespace && text::is_space(c)) {
      in_space = true;
      continue;
    }
    if (in_space && !out.empty()) out.push_back(U' ');
    in_space = false;
    out.push_back(c);
  }
  // trim
  std::size_t b = 0;
  std::size_t e = out.size();
  while (b < e && text::is_space(out[b])) ++b;
  while (e > b && text::is_space(out[e - 1])) --e;
  return text::encode_utf8(std::u32string_view(out).substr(b, e - b));
}

/// Translate, clean, then drop turns whose text became empty and renumber.
/// Dialogues left with no turns are dropped.
inline Corpus preprocess_corpus(const Corpus& corpus, const TranslateAdapter& adapter,
                                const std::string& target_lang, const CleanPolicy& policy) {
  policy.validate();
  Corpus out;
  for (const auto& d : corpus.dialogues) {
    Dialogue translated = translate_stage(d, adapter, target_lang);
    Dialogue cleaned;
    cleaned.interview_id = d.interview_id;
    for (auto& t : translated.turns) {
      t.text = clean_text(t.text, policy);
      if (t.text.empty()) continue;
      t.turn_index = cleaned.turns.size();
      cleaned.turns.push_back(std::move(t));
    }
    if (!cleaned.turns.empty()) out.dialogues.push_back(std::move(cleaned));
  }
  return out;
}

}  // namespace hypersumm
