#pragma once

// Toolkit configuration: an INI file with one section per pipeline stage.
//
//   [clean]      strip_chars, collapse_whitespace, drop_untranslatable,
//                untranslatable_lexicon
//   [translate]  adapter, target_lang
//   [noise]      seed, speaker_mask_ratio, mask_distinct_speakers,
//                infill_lambda, infill_token_ratio, merge_probability,
//                split_parts, window_fraction, enabled_ops, replicas
//   [rouge]      ns, multi_reference
//   [graph]      segment_size
//   [themes]     <theme> = comma-separated trigger phrases   (optional)
//   [styles]     <style> = comma-separated trigger phrases   (optional)
//   [paths]      input, output, summaries, candidates, references (optional)
//
// A stage section that is present must list every one of its keys, and a
// command fails when a section it needs is missing. Unknown sections and
// keys are rejected. Without a config file the built-in defaults apply.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "hypersumm/hypergraph.hpp"
#include "hypersumm/noise.hpp"
#include "hypersumm/preprocess.hpp"
#include "hypersumm/rouge.hpp"
#include "hypersumm/text.hpp"

namespace hypersumm {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Section { clean, translate, noise, rouge, graph };

struct TranslateSettings {
  std::string adapter = "identity";
  std::string target_lang = "en";
};

struct PathSettings {
  std::string input;
  std::string output;
  std::string summaries;
  std::string candidates;
  std::string references;
};

struct ToolkitConfig {
  CleanPolicy clean_policy = CleanPolicy::defaults();
  TranslateSettings translate;
  NoiseConfig noise;
  std::size_t replicas = 1;
  std::set<std::size_t> rouge_ns{1, 2};
  rouge::MultiReference multi_reference = rouge::MultiReference::pooled;
  graph::ThemeLexicon lexicon = graph::ThemeLexicon::defaults();
  std::size_t segment_size = 2;
  PathSettings paths;
};

/// Built-in translation adapters. A real machine-translation client plugs in
/// through TranslateAdapter directly; the config only names these.
inline TranslateAdapter make_adapter(const std::string& name) {
  if (name == "identity") return identity_adapter;
  if (name == "lowercase") return [](const std::string& s) { return text::to_lower_utf8(s); };
  if (name == "uppercase") {
    return [](const std::string& s) {
      std::string out = s;
      for (char& c : out) {
        if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
      }
      return out;
    };
  }
  throw ConfigError("translate.adapter: unknown adapter \"" + name + "\" (identity, lowercase, uppercase)");
}

namespace detail {

inline const std::map<std::string, std::vector<std::string>>& section_keys() {
  static const std::map<std::string, std::vector<std::string>> keys = {
      {"clean", {"strip_chars", "collapse_whitespace", "drop_untranslatable", "untranslatable_lexicon"}},
      {"translate", {"adapter", "target_lang"}},
      {"noise",
       {"seed", "speaker_mask_ratio", "mask_distinct_speakers", "infill_lambda", "infill_token_ratio",
        "merge_probability", "split_parts", "window_fraction", "enabled_ops", "replicas"}},
      {"rouge", {"ns", "multi_reference"}},
      {"graph", {"segment_size"}},
  };
  return keys;
}

inline std::string section_name(Section s) {
  switch (s) {
    case Section::clean: return "clean";
    case Section::translate: return "translate";
    case Section::noise: return "noise";
    case Section::rouge: return "rouge";
    case Section::graph: return "graph";
  }
  return "";
}

inline std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    const auto b = cur.find_first_not_of(" \t");
    const auto e = cur.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(cur.substr(b, e - b + 1));
    cur.clear();
  };
  for (char c : value) {
    if (c == ',') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": expected true or false, got \"" + v + "\"");
}

inline double parse_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a number, got \"" + v + "\"");
  }
  return out;
}

inline std::uint64_t parse_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(key + ": expected a non-negative integer, got \"" + v + "\"");
  }
  return out;
}

inline std::string format_double(double v) {
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << v;
  std::string s = os.str();
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

template <typename Range>
std::string join_list(const Range& items) {
  std::string out;
  bool first = true;
  for (const auto& item : items) {
    if (!first) out += ", ";
    first = false;
    if constexpr (std::is_arithmetic_v<std::decay_t<decltype(item)>>) {
      out += std::to_string(item);
    } else {
      out += std::string(item);
    }
  }
  return out;
}

/// Names of every [section] header in the raw text.
inline std::vector<std::string> declared_sections(const std::string& raw) {
  std::vector<std::string> out;
  std::istringstream in(raw);
  std::string line;
  while (std::getline(in, line)) {
    const auto b = line.find_first_not_of(" \t");
    const auto e = line.find_last_not_of(" \t\r");
    if (b == std::string::npos || line[b] != '[' || line[e] != ']' || e <= b + 1) continue;
    std::string name = line.substr(b + 1, e - b - 1);
    const auto nb = name.find_first_not_of(" \t");
    const auto ne = name.find_last_not_of(" \t");
    if (nb != std::string::npos) out.push_back(name.substr(nb, ne - nb + 1));
  }
  return out;
}

}  // namespace detail

/// Parses config text. `required` lists the stage sections the caller needs.
inline ToolkitConfig parse_config(std::istream& in, const std::set<Section>& required = {}) {
  namespace pt = boost::property_tree;
  const std::string raw{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  pt::ptree tree;
  try {
    std::istringstream src(raw);
    pt::read_ini(src, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  // read_ini drops sections without keys; put declared ones back so they are
  // checked for completeness like any other.
  for (const auto& name : detail::declared_sections(raw)) {
    if (tree.find(name) == tree.not_found()) tree.push_back({name, pt::ptree{}});
  }

  ToolkitConfig cfg;
  const auto& known = detail::section_keys();

  for (const auto& [name, node] : tree) {
    const bool stage = known.count(name) > 0;
    const bool table = name == "themes" || name == "styles";
    if (!node.data().empty()) throw ConfigError("unknown config key \"" + name + "\" outside any section");
    if (!stage && !table && name != "paths") throw ConfigError("unknown config section [" + name + "]");
    if (stage) {
      const auto& keys = known.at(name);
      for (const auto& [key, value] : node) {
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
          throw ConfigError("unknown config key \"" + name + "." + key + "\"");
        }
      }
      for (const auto& key : keys) {
        if (node.find(key) == node.not_found()) throw ConfigError("missing config key \"" + name + "." + key + "\"");
      }
    }
  }
  for (Section s : required) {
    const std::string name = detail::section_name(s);
    if (tree.find(name) == tree.not_found()) {
      throw ConfigError("missing config key \"" + name + "." + known.at(name).front() + "\" (section [" + name +
                        "] is required)");
    }
  }

  auto get = [&tree](const std::string& section, const std::string& key) {
    return tree.get_child(section).get_child(key).data();
  };

  if (tree.find("clean") != tree.not_found()) {
    CleanPolicy p;
    const auto chars = text::decode_utf8(get("clean", "strip_chars"));
    p.strip_chars.insert(chars.begin(), chars.end());
    p.collapse_whitespace = detail::parse_bool("clean.collapse_whitespace", get("clean", "collapse_whitespace"));
    p.drop_untranslatable = detail::parse_bool("clean.drop_untranslatable", get("clean", "drop_untranslatable"));
    for (auto& tok : detail::split_list(get("clean", "untranslatable_lexicon"))) p.untranslatable_lexicon.insert(tok);
    try {
      p.validate();
    } catch (const PreprocessError& e) {
      throw ConfigError(std::string("clean.strip_chars: ") + e.what());
    }
    cfg.clean_policy = std::move(p);
  }

  if (tree.find("translate") != tree.not_found()) {
    cfg.translate.adapter = get("translate", "adapter");
    cfg.translate.target_lang = get("translate", "target_lang");
    make_adapter(cfg.translate.adapter);  // reject unknown names early
    if (cfg.translate.target_lang.empty()) throw ConfigError("translate.target_lang must not be empty");
  }

  if (tree.find("noise") != tree.not_found()) {
    NoiseConfig n;
    n.seed = detail::parse_uint("noise.seed", get("noise", "seed"));
    n.speaker_mask_ratio = detail::parse_double("noise.speaker_mask_ratio", get("noise", "speaker_mask_ratio"));
    n.mask_distinct_speakers =
        detail::parse_bool("noise.mask_distinct_speakers", get("noise", "mask_distinct_speakers"));
    n.infill_lambda = detail::parse_double("noise.infill_lambda", get("noise", "infill_lambda"));
    n.infill_token_ratio = detail::parse_double("noise.infill_token_ratio", get("noise", "infill_token_ratio"));
    n.merge_probability = detail::parse_double("noise.merge_probability", get("noise", "merge_probability"));
    n.split_parts = detail::parse_uint("noise.split_parts", get("noise", "split_parts"));
    n.window_fraction = detail::parse_double("noise.window_fraction", get("noise", "window_fraction"));
    n.enabled_ops.clear();
    for (const auto& name : detail::split_list(get("noise", "enabled_ops"))) {
      const auto op = parse_noise_op(name);
      if (!op) throw ConfigError("noise.enabled_ops: unknown op \"" + name + "\"");
      n.enabled_ops.push_back(*op);
    }
    try {
      n.validate();
    } catch (const NoiseError& e) {
      throw ConfigError(std::string("noise: ") + e.what());
    }
    cfg.noise = std::move(n);
    cfg.replicas = detail::parse_uint("noise.replicas", get("noise", "replicas"));
    if (cfg.replicas == 0) throw ConfigError("noise.replicas must be >= 1");
  }

  if (tree.find("rouge") != tree.not_found()) {
    cfg.rouge_ns.clear();
    for (const auto& v : detail::split_list(get("rouge", "ns"))) {
      const auto n = detail::parse_uint("rouge.ns", v);
      if (n == 0) throw ConfigError("rouge.ns: n-gram order must be >= 1");
      cfg.rouge_ns.insert(n);
    }
    const auto mode = get("rouge", "multi_reference");
    if (mode == "pooled") {
      cfg.multi_reference = rouge::MultiReference::pooled;
    } else if (mode == "best") {
      cfg.multi_reference = rouge::MultiReference::best;
    } else {
      throw ConfigError("rouge.multi_reference: expected pooled or best, got \"" + mode + "\"");
    }
  }

  if (tree.find("graph") != tree.not_found()) {
    cfg.segment_size = detail::parse_uint("graph.segment_size", get("graph", "segment_size"));
    if (cfg.segment_size == 0) throw ConfigError("graph.segment_size must be >= 1");
  }

  auto read_table = [&tree](const std::string& section, std::map<std::string, std::set<std::string>>& out) {
    auto it = tree.find(section);
    if (it == tree.not_found()) return;
    out.clear();
    for (const auto& [name, value] : it->second) {
      const auto triggers = detail::split_list(value.data());
      if (triggers.empty()) throw ConfigError(section + "." + name + ": no trigger phrases");
      out[name].insert(triggers.begin(), triggers.end());
    }
  };
  read_table("themes", cfg.lexicon.themes);
  read_table("styles", cfg.lexicon.styles);

  if (auto it = tree.find("paths"); it != tree.not_found()) {
    for (const auto& [key, value] : it->second) {
      if (key == "input") cfg.paths.input = value.data();
      else if (key == "output") cfg.paths.output = value.data();
      else if (key == "summaries") cfg.paths.summaries = value.data();
      else if (key == "candidates") cfg.paths.candidates = value.data();
      else if (key == "references") cfg.paths.references = value.data();
      else throw ConfigError("unknown config key \"paths." + key + "\"");
    }
  }
  return cfg;
}

inline ToolkitConfig parse_config(std::string_view text, const std::set<Section>& required = {}) {
  std::istringstream in{std::string(text)};
  return parse_config(in, required);
}

inline ToolkitConfig load_config(const std::filesystem::path& path, const std::set<Section>& required = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  return parse_config(in, required);
}

/// Full config text for `cfg`, suitable for parse_config().
inline std::string format_config(const ToolkitConfig& cfg) {
  std::string out;
  out += "# hypersumm configuration\n";
  out += "# A section that is present must list all of its keys.\n\n";

  out += "[clean]\n";
  std::u32string chars(cfg.clean_policy.strip_chars.begin(), cfg.clean_policy.strip_chars.end());
  out += "strip_chars = " + text::encode_utf8(chars) + "\n";
  out += std::string("collapse_whitespace = ") + (cfg.clean_policy.collapse_whitespace ? "true" : "false") + "\n";
  out += std::string("drop_untranslatable = ") + (cfg.clean_policy.drop_untranslatable ? "true" : "false") + "\n";
  out += "untranslatable_lexicon = " + detail::join_list(cfg.clean_policy.untranslatable_lexicon) + "\n\n";

  out += "[translate]\n";
  out += "adapter = " + cfg.translate.adapter + "\n";
  out += "target_lang = " + cfg.translate.target_lang + "\n\n";

  const NoiseConfig& n = cfg.noise;
  out += "[noise]\n";
  out += "seed = " + std::to_string(n.seed) + "\n";
  out += "speaker_mask_ratio = " + detail::format_double(n.speaker_mask_ratio) + "\n";
  out += std::string("mask_distinct_speakers = ") + (n.mask_distinct_speakers ? "true" : "false") + "\n";
  out += "infill_lambda = " + detail::format_double(n.infill_lambda) + "\n";
  out += "infill_token_ratio = " + detail::format_double(n.infill_token_ratio) + "\n";
  out += "merge_probability = " + detail::format_double(n.merge_probability) + "\n";
  out += "split_parts = " + std::to_string(n.split_parts) + "\n";
  out += "window_fraction = " + detail::format_double(n.window_fraction) + "\n";
  std::vector<std::string> ops;
  for (NoiseOp op : n.enabled_ops) ops.emplace_back(to_string(op));
  out += "enabled_ops = " + detail::join_list(ops) + "\n";
  out += "replicas = " + std::to_string(cfg.replicas) + "\n\n";

  out += "[rouge]\n";
  out += "ns = " + detail::join_list(cfg.rouge_ns) + "\n";
  out += std::string("multi_reference = ") +
         (cfg.multi_reference == rouge::MultiReference::pooled ? "pooled" : "best") + "\n\n";

  out += "[graph]\n";
  out += "segment_size = " + std::to_string(cfg.segment_size) + "\n\n";

  out += "[themes]\n";
  for (const auto& [name, triggers] : cfg.lexicon.themes) out += name + " = " + detail::join_list(triggers) + "\n";
  out += "\n[styles]\n";
  for (const auto& [name, triggers] : cfg.lexicon.styles) out += name + " = " + detail::join_list(triggers) + "\n";

  out += "\n# Model training parameters below are recorded for reference only;\n";
  out += "# no command consumes them.\n";
  out += "#   label_smoothing_factor = 0.1\n";
  out += "#   per_device_train_batch_size = 1\n";
  out += "#   per_device_eval_batch_size = 2\n";
  out += "#   gradient_accumulation_steps = 1\n";
  out += "#   max_source_length = 3000\n";
  out += "#   max_target_length = 360\n";
  out += "#   learning_rate = 2e-5\n";
  out += "#   warmup_steps = 50\n";
  out += "#   max_steps = 10\n";
  out += "#   save_steps = 5\n";
  out += "#   eval_steps = 5\n";
  return out;
}

}  // namespace hypersumm
