#pragma once

// Static HTML rendering of a HyperGraph: index.html plus one page per node.
// Pages use relative links only and carry no scripts.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "hypersumm/hypergraph.hpp"

namespace hypersumm::graph {

inline std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&#39;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

inline std::string page_name(std::string_view node_id) { return std::string(node_id) + ".html"; }

namespace detail {

inline std::string page_head(std::string_view title) {
  std::string out;
  out += "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>";
  out += html_escape(title);
  out += "</title>\n</head>\n<body>\n";
  return out;
}

inline std::string link(const HyperNode& target, EdgeKind kind) {
  std::string out = "<li><a href=\"";
  out += html_escape(page_name(target.id));
  out += "\">";
  out += html_escape(target.title);
  out += "</a> <span class=\"edge\">(";
  out += to_string(kind);
  out += ")</span></li>\n";
  return out;
}

inline std::string render_node(const HyperGraph& g, const HyperNode& node,
                               const std::vector<const HyperEdge*>& outgoing,
                               const std::vector<const HyperEdge*>& incoming) {
  std::string out = page_head(node.title);
  out += "<p><a href=\"index.html\">Index</a></p>\n";
  out += "<h1>" + html_escape(node.title) + "</h1>\n";
  out += "<p class=\"kind\">" + std::string(to_string(node.kind)) + "</p>\n";
  if (node.source_ref) {
    out += "<p class=\"source\">" + html_escape(node.source_ref->interview_id) + ", turns " +
           std::to_string(node.source_ref->first_turn) + "-" + std::to_string(node.source_ref->last_turn) +
           "</p>\n";
  }
  out += "<pre class=\"body\">" + html_escape(node.body) + "</pre>\n";
  if (!outgoing.empty()) {
    out += "<h2>Links</h2>\n<ul>\n";
    for (const auto* e : outgoing) out += link(*g.find(e->dst), e->kind);
    out += "</ul>\n";
  }
  if (!incoming.empty()) {
    out += "<h2>Linked from</h2>\n<ul>\n";
    for (const auto* e : incoming) out += link(*g.find(e->src), e->kind);
    out += "</ul>\n";
  }
  out += "</body>\n</html>\n";
  return out;
}

inline std::string render_index(const HyperGraph& g) {
  std::string out = page_head("Dialogue hypertext");
  out += "<h1>Dialogue hypertext</h1>\n";
  out += "<p>" + std::to_string(g.nodes.size()) + " nodes, " + std::to_string(g.edges.size()) + " links</p>\n";
  for (NodeKind kind : kNodeKinds) {
    bool any = false;
    for (const auto& n : g.nodes) {
      if (n.kind != kind) continue;
      if (!any) {
        out += "<h2>" + std::string(to_string(kind)) + "</h2>\n<ul>\n";
        any = true;
      }
      out += "<li><a href=\"" + html_escape(page_name(n.id)) + "\">" + html_escape(n.title) + "</a></li>\n";
    }
    if (any) out += "</ul>\n";
  }
  out += "</body>\n</html>\n";
  return out;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw GraphError("cannot write " + path.string());
  f << content;
  if (!f) throw GraphError("cannot write " + path.string());
}

}  // namespace detail

/// Renders every page into memory: file name → content, index.html included.
inline std::map<std::string, std::string> render_site(const HyperGraph& g) {
  validate_graph(g);
  std::map<std::string, std::vector<const HyperEdge*>> outgoing;
  std::map<std::string, std::vector<const HyperEdge*>> incoming;
  for (const auto& e : g.edges) {
    outgoing[e.src].push_back(&e);
    incoming[e.dst].push_back(&e);
  }
  std::map<std::string, std::string> pages;
  pages["index.html"] = detail::render_index(g);
  for (const auto& n : g.nodes) {
    pages[page_name(n.id)] = detail::render_node(g, n, outgoing[n.id], incoming[n.id]);
  }
  return pages;
}

/// Writes the site into `out_dir` (created if missing) and returns the
/// written file names, sorted.
inline std::vector<std::string> export_html(const HyperGraph& g, const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec || !std::filesystem::is_directory(out_dir)) {
    throw GraphError("cannot create output directory " + out_dir.string() + (ec ? ": " + ec.message() : ""));
  }
  std::vector<std::string> manifest;
  for (const auto& [name, content] : render_site(g)) {
    detail::write_file(out_dir / name, content);
    manifest.push_back(name);
  }
  return manifest;
}

}  // namespace hypersumm::graph
