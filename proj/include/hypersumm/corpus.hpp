#pragma once

// Dialogue data model and the line-delimited record format.
//
// One turn per line:
//   {"interview_id": str, "turn_index": int, "speaker": str,
//    "role": "question"|"response"|"other", "text": str, "lang": str,
//    "tags": [str]}
// Fields outside this schema are kept in Turn::extra and written back out.

#include <algorithm>
#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

namespace hypersumm {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

inline constexpr std::string_view kMaskSpeaker = "[MASK SPEAKER]";
inline constexpr std::string_view kDefaultLang = "und";

/// Data error while reading or validating records. line() is 0 when the
/// problem is not tied to a single input line.
class CorpusError : public std::runtime_error {
 public:
  explicit CorpusError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

enum class Role { question, response, other };

inline std::string_view to_string(Role r) {
  switch (r) {
    case Role::question: return "question";
    case Role::response: return "response";
    case Role::other: return "other";
  }
  return "other";
}

inline std::optional<Role> parse_role(std::string_view s) {
  if (s == "question") return Role::question;
  if (s == "response") return Role::response;
  if (s == "other") return Role::other;
  return std::nullopt;
}

struct Turn {
  std::string interview_id;
  std::size_t turn_index = 0;
  std::string speaker;
  Role role = Role::other;
  std::string text;
  std::string lang{kDefaultLang};
  std::set<std::string> tags;
  json extra = json::object();  // unknown record fields, preserved verbatim

  bool operator==(const Turn&) const = default;
};

struct Dialogue {
  std::string interview_id;
  std::vector<Turn> turns;

  bool operator==(const Dialogue&) const = default;
};

/// Dialogues ordered by interview_id.
struct Corpus {
  std::vector<Dialogue> dialogues;

  std::size_t turn_count() const {
    std::size_t n = 0;
    for (const auto& d : dialogues) n += d.turns.size();
    return n;
  }

  const Dialogue* find(std::string_view id) const {
    auto it = std::lower_bound(dialogues.begin(), dialogues.end(), id,
                               [](const Dialogue& d, std::string_view v) { return d.interview_id < v; });
    return (it != dialogues.end() && it->interview_id == id) ? &*it : nullptr;
  }

  bool operator==(const Corpus&) const = default;
};

struct SummaryPair {
  std::string dialogue_id;
  std::string source_text;
  std::string target_summary;
};

/// One line of a summary file: {"dialogue_id": str, "summary": str}.
struct SummaryRecord {
  std::string dialogue_id;
  std::string summary;
  std::size_t line = 0;
};

// ---------------------------------------------------------------------------
// Turn records

inline ordered_json turn_to_json(const Turn& t) {
  ordered_json j;
  j["interview_id"] = t.interview_id;
  j["turn_index"] = t.turn_index;
  j["speaker"] = t.speaker;
  j["role"] = to_string(t.role);
  j["text"] = t.text;
  j["lang"] = t.lang;
  j["tags"] = t.tags;
  for (const auto& [key, value] : t.extra.items()) j[key] = value;
  return j;
}

namespace detail {

inline std::string require_string(const json& obj, const char* key, std::size_t line) {
  auto it = obj.find(key);
  if (it == obj.end()) throw CorpusError(std::string("missing field \"") + key + "\"", line);
  if (!it->is_string()) throw CorpusError(std::string("field \"") + key + "\" must be a string", line);
  return it->get<std::string>();
}

}  // namespace detail

/// Builds a Turn from one decoded record. `line` is only used for messages.
inline Turn turn_from_json(const json& j, std::size_t line = 0) {
  if (!j.is_object()) throw CorpusError("record is not a JSON object", line);
  Turn t;
  t.interview_id = detail::require_string(j, "interview_id", line);
  if (t.interview_id.empty()) throw CorpusError("empty interview_id", line);

  auto idx = j.find("turn_index");
  if (idx == j.end()) throw CorpusError("missing field \"turn_index\"", line);
  if (!idx->is_number_unsigned()) {
    if (idx->is_number_integer()) throw CorpusError("negative turn_index", line);
    throw CorpusError("field \"turn_index\" must be a non-negative integer", line);
  }
  t.turn_index = idx->get<std::size_t>();

  t.speaker = detail::require_string(j, "speaker", line);
  if (t.speaker.empty()) throw CorpusError("empty speaker", line);
  t.text = detail::require_string(j, "text", line);

  if (auto r = j.find("role"); r != j.end() && !r->is_null()) {
    if (!r->is_string()) throw CorpusError("field \"role\" must be a string", line);
    auto role = parse_role(r->get<std::string>());
    if (!role) throw CorpusError("unknown role \"" + r->get<std::string>() + "\"", line);
    t.role = *role;
  }
  if (auto l = j.find("lang"); l != j.end() && !l->is_null()) {
    if (!l->is_string()) throw CorpusError("field \"lang\" must be a string", line);
    t.lang = l->get<std::string>();
  }
  if (auto tg = j.find("tags"); tg != j.end() && !tg->is_null()) {
    if (!tg->is_array()) throw CorpusError("field \"tags\" must be an array of strings", line);
    for (const auto& tag : *tg) {
      if (!tag.is_string()) throw CorpusError("field \"tags\" must be an array of strings", line);
      t.tags.insert(tag.get<std::string>());
    }
  }
  static const std::set<std::string> kKnown = {"interview_id", "turn_index", "speaker", "role",
                                               "text", "lang", "tags"};
  for (const auto& [key, value] : j.items()) {
    if (!kKnown.count(key)) t.extra[key] = value;
  }
  return t;
}

// ---------------------------------------------------------------------------
// Corpus assembly

namespace detail {

struct LocatedTurn {
  Turn turn;
  std::size_t line = 0;
};

inline Corpus assemble(std::vector<LocatedTurn> records) {
  std::map<std::string, std::vector<LocatedTurn>> groups;
  for (auto& r : records) groups[r.turn.interview_id].push_back(std::move(r));

  Corpus corpus;
  corpus.dialogues.reserve(groups.size());
  for (auto& [id, turns] : groups) {
    std::stable_sort(turns.begin(), turns.end(), [](const LocatedTurn& a, const LocatedTurn& b) {
      return a.turn.turn_index < b.turn.turn_index;
    });
    Dialogue d;
    d.interview_id = id;
    for (std::size_t i = 0; i < turns.size(); ++i) {
      const auto& lt = turns[i];
      if (i > 0 && turns[i - 1].turn.turn_index == lt.turn.turn_index) {
        throw CorpusError("duplicate turn (" + id + ", " + std::to_string(lt.turn.turn_index) + ")",
                          std::max(lt.line, turns[i - 1].line));
      }
      if (lt.turn.turn_index != i) {
        throw CorpusError("non-contiguous turn_index at " + id + " (expected " + std::to_string(i) +
                              ", found " + std::to_string(lt.turn.turn_index) + ")",
                          lt.line);
      }
      d.turns.push_back(std::move(turns[i].turn));
    }
    corpus.dialogues.push_back(std::move(d));
  }
  return corpus;
}

}  // namespace detail

/// Groups loose turns by interview_id and checks index contiguity.
inline Corpus group_turns(std::vector<Turn> turns) {
  std::vector<detail::LocatedTurn> located;
  located.reserve(turns.size());
  for (auto& t : turns) located.push_back({std::move(t), 0});
  return detail::assemble(std::move(located));
}

/// Parses line-delimited turn records. Blank lines are skipped. Every
/// rejection carries the 1-based line number.
inline Corpus parse_corpus(std::istream& in) {
  std::vector<detail::LocatedTurn> records;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw CorpusError(std::string("malformed record: ") + e.what(), lineno);
    }
    records.push_back({turn_from_json(j, lineno), lineno});
  }
  return detail::assemble(std::move(records));
}

inline Corpus parse_corpus(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_corpus(in);
}

/// Canonical form: dialogues by interview_id, turns by index, one compact
/// record per line, LF terminated.
inline void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& d : corpus.dialogues) {
    for (const auto& t : d.turns) out << turn_to_json(t).dump() << '\n';
  }
}

inline std::string serialize_corpus(const Corpus& corpus) {
  std::ostringstream out;
  write_corpus(out, corpus);
  return out.str();
}

/// Checks the Dialogue invariants; throws CorpusError naming the problem.
inline void validate_dialogue(const Dialogue& d) {
  if (d.turns.empty()) throw CorpusError("dialogue " + d.interview_id + " has no turns");
  for (std::size_t i = 0; i < d.turns.size(); ++i) {
    const Turn& t = d.turns[i];
    if (t.interview_id != d.interview_id) {
      throw CorpusError("turn " + std::to_string(i) + " of " + d.interview_id +
                        " carries interview_id " + t.interview_id);
    }
    if (t.turn_index != i) throw CorpusError("non-contiguous turn_index at " + d.interview_id);
    if (t.speaker.empty()) throw CorpusError("empty speaker at (" + d.interview_id + "," + std::to_string(i) + ")");
  }
}

// ---------------------------------------------------------------------------
// Summary files

inline std::vector<SummaryRecord> parse_summaries(std::istream& in) {
  std::vector<SummaryRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw CorpusError(std::string("malformed summary record: ") + e.what(), lineno);
    }
    if (!j.is_object()) throw CorpusError("summary record is not a JSON object", lineno);
    SummaryRecord r;
    r.dialogue_id = detail::require_string(j, "dialogue_id", lineno);
    r.summary = detail::require_string(j, "summary", lineno);
    if (r.dialogue_id.empty()) throw CorpusError("empty dialogue_id", lineno);
    if (r.summary.empty()) throw CorpusError("empty summary", lineno);
    r.line = lineno;
    out.push_back(std::move(r));
  }
  return out;
}

inline std::vector<SummaryRecord> parse_summaries(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_summaries(in);
}

inline std::string serialize_summaries(const std::vector<SummaryRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    ordered_json j;
    j["dialogue_id"] = r.dialogue_id;
    j["summary"] = r.summary;
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace hypersumm
