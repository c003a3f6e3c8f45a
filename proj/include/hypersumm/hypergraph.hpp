#pragma once

// Hypertext graph over dialogues: segment, summary, theme and style nodes,
// joined by typed navigational edges.

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "hypersumm/corpus.hpp"
#include "hypersumm/preprocess.hpp"
#include "hypersumm/rouge.hpp"
#include "hypersumm/text.hpp"

namespace hypersumm::graph {

class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class NodeKind { segment, summary, theme, style };
enum class EdgeKind { temporal_next, same_theme, same_speaker, summary_of, style_of };

inline constexpr std::array<NodeKind, 4> kNodeKinds = {NodeKind::segment, NodeKind::summary, NodeKind::theme,
                                                       NodeKind::style};
inline constexpr std::array<EdgeKind, 5> kEdgeKinds = {EdgeKind::temporal_next, EdgeKind::same_theme,
                                                       EdgeKind::same_speaker, EdgeKind::summary_of,
                                                       EdgeKind::style_of};

inline std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::segment: return "segment";
    case NodeKind::summary: return "summary";
    case NodeKind::theme: return "theme";
    case NodeKind::style: return "style";
  }
  return "";
}

inline std::string_view to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::temporal_next: return "temporal_next";
    case EdgeKind::same_theme: return "same_theme";
    case EdgeKind::same_speaker: return "same_speaker";
    case EdgeKind::summary_of: return "summary_of";
    case EdgeKind::style_of: return "style_of";
  }
  return "";
}

template <typename Kind, std::size_t N>
std::optional<Kind> parse_kind(std::string_view s, const std::array<Kind, N>& all) {
  for (Kind k : all) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

struct SourceRef {
  std::string interview_id;
  std::size_t first_turn = 0;
  std::size_t last_turn = 0;  // inclusive
  bool operator==(const SourceRef&) const = default;
};

struct HyperNode {
  std::string id;
  NodeKind kind = NodeKind::segment;
  std::string title;
  std::string body;
  std::optional<SourceRef> source_ref;
  bool operator==(const HyperNode&) const = default;
};

struct HyperEdge {
  std::string src;
  std::string dst;
  EdgeKind kind = EdgeKind::temporal_next;

  auto key() const { return std::tie(src, dst, kind); }
  bool operator<(const HyperEdge& o) const { return key() < o.key(); }
  bool operator==(const HyperEdge&) const = default;
};

/// Nodes sorted by id, edges by (src, dst, kind); both free of duplicates.
struct HyperGraph {
  std::vector<HyperNode> nodes;
  std::vector<HyperEdge> edges;

  const HyperNode* find(std::string_view id) const {
    auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                               [](const HyperNode& n, std::string_view v) { return n.id < v; });
    return (it != nodes.end() && it->id == id) ? &*it : nullptr;
  }

  bool operator==(const HyperGraph&) const = default;
};

/// Trigger phrases per theme and per leadership style.
struct ThemeLexicon {
  std::map<std::string, std::set<std::string>> themes;
  std::map<std::string, std::set<std::string>> styles;

  static ThemeLexicon defaults() {
    ThemeLexicon lex;
    lex.themes["reaction_to_robot_behavior"] = {
        "gesture", "gestures", "facial expression", "facial expressions", "movement", "movements",
        "role model", "behavior", "behaviour", "appearance", "pre-programmed", "scripted", "posture"};
    lex.themes["emotional_response"] = {
        "friendly", "empathy", "emotion", "emotions", "emotional", "comfortable", "uncomfortable",
        "enthusiasm", "enthusiastic", "cold", "warm", "nervous", "felt"};
    lex.themes["leadership_applicability"] = {
        "leader", "leaders", "leadership", "boss", "manager", "team", "employees", "credibility",
        "credible", "authority", "trust", "motivate", "motivating"};
    lex.styles["transformational"] = {"vision", "inspiring", "inspired", "passion", "passionate",
                                      "role model", "enthusiasm", "individual", "encouraged"};
    lex.styles["transactional"] = {"reward", "rewards", "bonus", "targets", "instructions",
                                   "tasks", "rules", "points", "penalty", "deadline"};
    return lex;
  }
};

/// True when `phrase` occurs as a contiguous token run in `body`, both
/// tokenized the same way as for ROUGE (lowercased, punctuation dropped).
inline bool phrase_matches(const rouge::TokenSeq& body, const rouge::TokenSeq& phrase) {
  if (phrase.empty() || phrase.size() > body.size()) return false;
  return std::search(body.tokens.begin(), body.tokens.end(), phrase.tokens.begin(), phrase.tokens.end()) !=
         body.tokens.end();
}

/// Every theme and style with at least one matching trigger phrase.
inline std::set<std::string> tag_themes(const HyperNode& node, const ThemeLexicon& lexicon) {
  if (node.kind != NodeKind::segment && node.kind != NodeKind::summary) {
    throw GraphError("only segment and summary nodes can be tagged");
  }
  std::set<std::string> out;
  const rouge::TokenSeq body = rouge::tokenize(node.body);
  auto scan = [&](const std::map<std::string, std::set<std::string>>& table) {
    for (const auto& [name, triggers] : table) {
      for (const auto& trig : triggers) {
        if (phrase_matches(body, rouge::tokenize(trig))) {
          out.insert(name);
          break;
        }
      }
    }
  };
  scan(lexicon.themes);
  scan(lexicon.styles);
  return out;
}

// ---------------------------------------------------------------------------
// Segmentation

inline std::string segment_id(std::string_view interview_id, std::size_t first, std::size_t last) {
  auto pad = [](std::size_t v) {
    std::string s = std::to_string(v);
    return s.size() < 4 ? std::string(4 - s.size(), '0') + s : s;
  };
  return "seg-" + text::slug(interview_id) + "-" + pad(first) + "-" + pad(last);
}

/// Half-open turn ranges [first, last) for each segment. Segments hold at
/// most `max_turns` turns and end early rather than separate a question
/// from the response right after it. With max_turns == 1 pairs cannot be
/// kept together and are split.
inline std::vector<std::pair<std::size_t, std::size_t>> segment_bounds(const std::vector<Turn>& turns,
                                                                       std::size_t max_turns) {
  if (max_turns == 0) throw GraphError("max_turns_per_segment must be >= 1");
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t start = 0;
  while (start < turns.size()) {
    std::size_t end = std::min(turns.size(), start + max_turns);
    if (end < turns.size() && end - start > 1 && turns[end - 1].role == Role::question &&
        turns[end].role == Role::response) {
      --end;
    }
    out.emplace_back(start, end);
    start = end;
  }
  return out;
}

inline std::vector<HyperNode> segment_dialogue(const Dialogue& dialogue, std::size_t max_turns_per_segment) {
  std::vector<HyperNode> out;
  for (const auto& [first, last] : segment_bounds(dialogue.turns, max_turns_per_segment)) {
    std::vector<Turn> part(dialogue.turns.begin() + static_cast<std::ptrdiff_t>(first),
                           dialogue.turns.begin() + static_cast<std::ptrdiff_t>(last));
    HyperNode node;
    node.kind = NodeKind::segment;
    node.id = segment_id(dialogue.interview_id, first, last - 1);
    node.title = dialogue.interview_id + " turns " + std::to_string(first) + "-" + std::to_string(last - 1);
    node.body = build_qr_text(part);
    node.source_ref = SourceRef{dialogue.interview_id, first, last - 1};
    out.push_back(std::move(node));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Graph construction

inline std::string summary_id(const SummaryPair& s) {
  return "sum-" + text::slug(s.dialogue_id) + "-" + text::hex64(text::fnv1a64(s.target_summary), 8);
}

inline std::string theme_id(std::string_view name) { return "theme-" + text::slug(name); }
inline std::string style_id(std::string_view name) { return "style-" + text::slug(name); }

inline std::string pretty_name(std::string_view name) {
  std::string out(name);
  std::replace(out.begin(), out.end(), '_', ' ');
  if (!out.empty() && out[0] >= 'a' && out[0] <= 'z') out[0] = static_cast<char>(out[0] - 'a' + 'A');
  return out;
}

/// Builds the graph:
///  - temporal_next chains each dialogue's segments in order;
///  - same_theme links every segment pair sharing a theme (lower id to higher
///    id) and each tagged segment to its theme node;
///  - same_speaker links consecutive segments of a dialogue in which a
///    speaker appears (mask tokens excluded);
///  - summary_of links a summary to every segment of its dialogue;
///  - style_of links a style node to every segment tagged with it.
inline HyperGraph build_graph(const Corpus& corpus, const std::vector<SummaryPair>& summaries,
                              const ThemeLexicon& lexicon, std::size_t max_turns_per_segment) {
  std::map<std::string, HyperNode> nodes;
  std::set<HyperEdge> edges;
  std::map<std::string, std::vector<std::string>> segments_of;  // dialogue → segment ids
  std::map<std::string, std::set<std::string>> theme_members;   // theme → segment ids
  std::map<std::string, std::set<std::string>> style_members;

  for (const auto& dialogue : corpus.dialogues) {
    const auto bounds = segment_bounds(dialogue.turns, max_turns_per_segment);
    const auto segs = segment_dialogue(dialogue, max_turns_per_segment);
    std::map<std::string, std::string> last_seen;  // speaker → latest segment id
    for (std::size_t s = 0; s < segs.size(); ++s) {
      const HyperNode& node = segs[s];
      if (nodes.count(node.id)) throw GraphError("segment id collision: " + node.id);
      segments_of[dialogue.interview_id].push_back(node.id);
      if (s > 0) edges.insert({segs[s - 1].id, node.id, EdgeKind::temporal_next});

      std::set<std::string> speakers;
      for (std::size_t t = bounds[s].first; t < bounds[s].second; ++t) {
        if (dialogue.turns[t].speaker != kMaskSpeaker) speakers.insert(dialogue.turns[t].speaker);
      }
      for (const auto& sp : speakers) {
        auto it = last_seen.find(sp);
        if (it != last_seen.end()) edges.insert({it->second, node.id, EdgeKind::same_speaker});
        last_seen[sp] = node.id;
      }

      for (const auto& tag : tag_themes(node, lexicon)) {
        if (lexicon.themes.count(tag)) theme_members[tag].insert(node.id);
        if (lexicon.styles.count(tag)) style_members[tag].insert(node.id);
      }
      nodes.emplace(node.id, node);
    }
  }

  for (const auto& s : summaries) {
    auto it = segments_of.find(s.dialogue_id);
    if (it == segments_of.end()) throw GraphError("summary for unknown dialogue_id " + s.dialogue_id);
    HyperNode node;
    node.kind = NodeKind::summary;
    node.id = summary_id(s);
    node.title = "Summary of " + s.dialogue_id;
    node.body = s.target_summary;
    for (const auto& seg : it->second) edges.insert({node.id, seg, EdgeKind::summary_of});
    nodes.emplace(node.id, std::move(node));
  }

  for (const auto& [theme, members] : theme_members) {
    HyperNode node;
    node.kind = NodeKind::theme;
    node.id = theme_id(theme);
    node.title = pretty_name(theme);
    node.body = "Segments tagged with the theme " + theme + ".";
    for (auto a = members.begin(); a != members.end(); ++a) {
      edges.insert({*a, node.id, EdgeKind::same_theme});
      for (auto b = std::next(a); b != members.end(); ++b) edges.insert({*a, *b, EdgeKind::same_theme});
    }
    if (nodes.count(node.id)) throw GraphError("node id collision: " + node.id);
    nodes.emplace(node.id, std::move(node));
  }
  for (const auto& [style, members] : style_members) {
    HyperNode node;
    node.kind = NodeKind::style;
    node.id = style_id(style);
    node.title = pretty_name(style) + " leadership";
    node.body = "Segments tagged with the " + style + " leadership style.";
    for (const auto& seg : members) edges.insert({node.id, seg, EdgeKind::style_of});
    if (nodes.count(node.id)) throw GraphError("node id collision: " + node.id);
    nodes.emplace(node.id, std::move(node));
  }

  HyperGraph g;
  g.nodes.reserve(nodes.size());
  for (auto& [id, node] : nodes) g.nodes.push_back(std::move(node));
  g.edges.assign(edges.begin(), edges.end());
  return g;
}

/// Referential integrity and the temporal chain shape; throws GraphError.
inline void validate_graph(const HyperGraph& g) {
  for (std::size_t i = 1; i < g.nodes.size(); ++i) {
    if (!(g.nodes[i - 1].id < g.nodes[i].id)) throw GraphError("node ids unsorted or duplicated near " + g.nodes[i].id);
  }
  std::map<std::string, int> out_deg;
  std::map<std::string, int> in_deg;
  for (const auto& e : g.edges) {
    if (!g.find(e.src)) throw GraphError("edge source " + e.src + " does not exist");
    if (!g.find(e.dst)) throw GraphError("edge target " + e.dst + " does not exist");
    if (e.kind == EdgeKind::temporal_next) {
      if (++out_deg[e.src] > 1) throw GraphError("segment " + e.src + " has two temporal successors");
      if (++in_deg[e.dst] > 1) throw GraphError("segment " + e.dst + " has two temporal predecessors");
    }
  }
  for (const auto& n : g.nodes) {
    if (n.kind == NodeKind::segment && !n.source_ref) throw GraphError("segment " + n.id + " lacks a source_ref");
  }
}

// ---------------------------------------------------------------------------
// Record file: node lines, then edge lines.
//   {"node": {"id", "kind", "title", "body", "source_ref"}}
//   {"edge": {"src", "dst", "kind"}}

inline std::string export_graph_record(const HyperGraph& g) {
  std::string out;
  for (const auto& n : g.nodes) {
    ordered_json node;
    node["id"] = n.id;
    node["kind"] = to_string(n.kind);
    node["title"] = n.title;
    node["body"] = n.body;
    if (n.source_ref) {
      node["source_ref"] = {{"interview_id", n.source_ref->interview_id},
                            {"first_turn", n.source_ref->first_turn},
                            {"last_turn", n.source_ref->last_turn}};
    } else {
      node["source_ref"] = nullptr;
    }
    ordered_json line;
    line["node"] = std::move(node);
    out += line.dump();
    out += '\n';
  }
  for (const auto& e : g.edges) {
    ordered_json edge;
    edge["src"] = e.src;
    edge["dst"] = e.dst;
    edge["kind"] = to_string(e.kind);
    ordered_json line;
    line["edge"] = std::move(edge);
    out += line.dump();
    out += '\n';
  }
  return out;
}

inline HyperGraph parse_graph_record(std::istream& in) {
  HyperGraph g;
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&lineno](const std::string& msg) { return GraphError("line " + std::to_string(lineno) + ": " + msg); };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("node")) {
        const json& n = j.at("node");
        HyperNode node;
        node.id = n.at("id").get<std::string>();
        const auto kind = parse_kind(n.at("kind").get<std::string>(), kNodeKinds);
        if (!kind) throw fail("unknown node kind");
        node.kind = *kind;
        node.title = n.at("title").get<std::string>();
        node.body = n.at("body").get<std::string>();
        if (auto sr = n.find("source_ref"); sr != n.end() && !sr->is_null()) {
          node.source_ref = SourceRef{sr->at("interview_id").get<std::string>(),
                                      sr->at("first_turn").get<std::size_t>(),
                                      sr->at("last_turn").get<std::size_t>()};
        }
        if (!g.edges.empty()) throw fail("node record after edge records");
        g.nodes.push_back(std::move(node));
      } else if (j.contains("edge")) {
        const json& e = j.at("edge");
        const auto kind = parse_kind(e.at("kind").get<std::string>(), kEdgeKinds);
        if (!kind) throw fail("unknown edge kind");
        g.edges.push_back({e.at("src").get<std::string>(), e.at("dst").get<std::string>(), *kind});
      } else {
        throw fail("record is neither a node nor an edge");
      }
    } catch (const json::exception& e) {
      throw fail(e.what());
    }
  }
  std::sort(g.nodes.begin(), g.nodes.end(), [](const HyperNode& a, const HyperNode& b) { return a.id < b.id; });
  std::sort(g.edges.begin(), g.edges.end());
  validate_graph(g);
  return g;
}

inline HyperGraph parse_graph_record(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_graph_record(in);
}

}  // namespace hypersumm::graph
