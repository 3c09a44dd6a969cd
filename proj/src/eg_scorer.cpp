#include "booqa/eg_scorer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "booqa/log.hpp"
#include "booqa/parallel.hpp"

namespace booqa {

namespace {

// "go.to.2" -> {"go", "to"}; a role without a trailing slot number keeps all
// its parts.
std::vector<std::string> role_tokens(std::string_view role) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  for (;;) {
    const auto dot = role.find('.', start);
    parts.emplace_back(role.substr(start, dot == std::string_view::npos ? std::string_view::npos : dot - start));
    if (dot == std::string_view::npos) break;
    start = dot + 1;
  }
  if (parts.size() > 1 && !parts.back().empty() &&
      std::all_of(parts.back().begin(), parts.back().end(), [](char c) { return c >= '0' && c <= '9'; })) {
    parts.pop_back();
  }
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

std::optional<double> parse_score(std::string_view s) {
  std::string text(s);
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string fuzzy_key(std::span<const std::string> tokens, const text::Lemmatizer& lemmatizer) {
  const auto words = text::split_whitespace(text::join(tokens));
  return lemmatizer.lemma_key(words);
}

}  // namespace

std::optional<TypedPredicate> TypedPredicate::parse(std::string_view node) {
  if (node.empty() || node.front() != '(') return std::nullopt;
  const auto close = node.find(')');
  if (close == std::string_view::npos) return std::nullopt;
  const auto roles = node.substr(1, close - 1);
  const auto comma = roles.find(',');
  if (comma == std::string_view::npos) return std::nullopt;
  TypedPredicate p;
  p.first_role = std::string(roles.substr(0, comma));
  p.second_role = std::string(roles.substr(comma + 1));
  auto rest = node.substr(close + 1);
  if (!rest.empty()) {
    if (rest.front() != '#') return std::nullopt;
    rest.remove_prefix(1);
    const auto hash = rest.find('#');
    if (hash == std::string_view::npos) return std::nullopt;
    p.first_type = std::string(rest.substr(0, hash));
    p.second_type = std::string(rest.substr(hash + 1));
  }
  if (p.first_role.empty() || p.second_role.empty() || role_tokens(p.first_role).empty()) return std::nullopt;
  return p;
}

TypedPredicate TypedPredicate::from_tokens(std::span<const std::string> predicate_tokens, std::string_view first_type,
                                           std::string_view second_type) {
  const auto words = text::split_whitespace(text::join(predicate_tokens));
  TypedPredicate p;
  const std::string head = words.empty() ? std::string() : words.front();
  p.first_role = head + ".1";
  p.second_role = text::join(words, ".") + ".2";
  p.first_type = std::string(first_type);
  p.second_type = std::string(second_type);
  return p;
}

std::string TypedPredicate::node() const {
  std::string out = "(" + first_role + "," + second_role + ")";
  if (!first_type.empty() || !second_type.empty()) out += "#" + first_type + "#" + second_type;
  return out;
}

std::string TypedPredicate::surface() const {
  auto tokens = role_tokens(first_role);
  const auto second = role_tokens(second_role);
  std::size_t common = 0;
  while (common < tokens.size() && common < second.size() && tokens[common] == second[common]) ++common;
  tokens.insert(tokens.end(), second.begin() + static_cast<std::ptrdiff_t>(common), second.end());
  return text::normalize(text::join(tokens));
}

std::string TypedPredicate::type_pair() const { return type_pair_key(first_type, second_type); }

std::string base_type(std::string_view type) {
  if (type.size() > 2 && type[type.size() - 2] == '_' && (type.back() == '1' || type.back() == '2')) {
    type.remove_suffix(2);
  }
  return text::fold_case(type);
}

std::string type_pair_key(std::string_view a, std::string_view b) {
  std::string x = base_type(a), y = base_type(b);
  if (y < x) std::swap(x, y);
  return x + "#" + y;
}

struct EntailmentGraph::Subgraph {
  std::vector<std::string> nodes;
  std::unordered_map<std::string, std::uint32_t> index;
  std::unordered_map<std::string, std::vector<std::uint32_t>> by_surface;
  std::vector<std::unordered_map<std::uint32_t, double>> out;
  text::Lemmatizer lemmatizer;
  SubgraphStats stats;
  Diagnostics diagnostics;

  std::uint32_t node_id(const std::string& node, const TypedPredicate& parsed) {
    auto [it, inserted] = index.emplace(node, static_cast<std::uint32_t>(nodes.size()));
    if (inserted) {
      nodes.push_back(node);
      out.emplace_back();
      by_surface[parsed.surface()].push_back(it->second);
    }
    return it->second;
  }

  void add_edge(std::string_view from, std::string_view to, std::string_view score_text, const std::string& where) {
    auto p = TypedPredicate::parse(from);
    auto q = TypedPredicate::parse(to);
    auto score = parse_score(score_text);
    if (!p || !q || !score) {
      ++stats.malformed_lines;
      if (stats.malformed_lines <= 5) diagnostics.push_back({"malformed_edge", where});
      return;
    }
    const auto a = node_id(std::string(from), *p);
    const auto b = node_id(std::string(to), *q);
    auto [it, inserted] = out[a].emplace(b, *score);
    if (!inserted) {
      ++stats.duplicate_edges;
      diagnostics.push_back({"duplicate_edge", where + ": " + std::string(from) + " -> " + std::string(to) +
                                                   " redefined, keeping the later score"});
      it->second = *score;
    }
  }

  void finish() {
    std::unordered_set<std::string> vocabulary;
    for (const auto& [surface, ids] : by_surface) {
      for (auto& t : text::split_whitespace(surface)) vocabulary.insert(std::move(t));
    }
    lemmatizer = text::Lemmatizer(std::move(vocabulary));
    stats.nodes = nodes.size();
    stats.edges = 0;
    std::size_t bytes = 0;
    for (const auto& n : nodes) bytes += n.size() * 2 + 48;  // node string plus index entry
    for (const auto& adj : out) {
      stats.edges += adj.size();
      bytes += 56 + adj.size() * 32;
    }
    stats.approx_bytes = bytes;
  }

  void parse_tsv(std::istream& in, const std::string& name) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      const auto t1 = line.find('\t');
      const auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
      const std::string where = name + ":" + std::to_string(line_no);
      if (t2 == std::string::npos || line.find('\t', t2 + 1) != std::string::npos) {
        ++stats.malformed_lines;
        if (stats.malformed_lines <= 5) diagnostics.push_back({"malformed_edge", where});
        continue;
      }
      add_edge(std::string_view(line).substr(0, t1), std::string_view(line).substr(t1 + 1, t2 - t1 - 1),
               std::string_view(line).substr(t2 + 1), where);
    }
  }

  // Blocks of the form
  //   predicate: <node>
  //   num neighbors: <n>
  //   <name> sims
  //   <node> <score>
  //   ...
  void parse_sims(std::istream& in, const std::string& name, const std::string& wanted_section) {
    std::string line, current, section;
    bool take = false, seen_section = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      const std::string trimmed = text::normalize_whitespace(line);
      if (trimmed.empty()) continue;
      if (trimmed.starts_with("predicate:")) {
        current = text::normalize_whitespace(trimmed.substr(10));
        seen_section = false;
        take = false;
        continue;
      }
      if (trimmed.starts_with("num neighbors")) continue;
      if (trimmed.ends_with("sims") && trimmed.find(' ') != std::string::npos &&
          !TypedPredicate::parse(trimmed.substr(0, trimmed.find(' ')))) {
        section = trimmed;
        take = wanted_section.empty() ? !seen_section : section == wanted_section;
        seen_section = true;
        continue;
      }
      const std::string where = name + ":" + std::to_string(line_no);
      const auto space = trimmed.rfind(' ');
      if (current.empty() || space == std::string::npos || !seen_section) {
        ++stats.malformed_lines;
        if (stats.malformed_lines <= 5) diagnostics.push_back({"malformed_edge", where});
        continue;
      }
      if (!take) continue;
      add_edge(current, std::string_view(trimmed).substr(0, space), std::string_view(trimmed).substr(space + 1),
               where);
    }
  }
};

struct EntailmentGraph::Slot {
  SubgraphSource source;
  std::once_flag once;
  bool preloaded = false;
  std::unique_ptr<Subgraph> graph;
};

std::shared_ptr<EntailmentGraph> EntailmentGraph::from_sources(std::vector<SubgraphSource> sources,
                                                               std::string provenance) {
  std::shared_ptr<EntailmentGraph> g(new EntailmentGraph());
  g->provenance_ = std::move(provenance);
  for (auto& s : sources) {
    const auto key = s.type_pair;
    if (g->slots_.contains(key)) throw InputError("two graph files for type pair " + key);
    auto slot = std::make_unique<Slot>();
    slot->source = std::move(s);
    g->slots_.emplace(key, std::move(slot));
  }
  if (g->slots_.empty()) log::warn("empty_graph", {{"provenance", g->provenance_}});
  return g;
}

std::shared_ptr<EntailmentGraph> EntailmentGraph::open_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InputError("graph directory not found: " + dir.string());
  const auto manifest_path = dir / "manifest.json";
  std::vector<SubgraphSource> sources;
  std::string provenance = "custom";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream in(manifest_path);
    auto doc = nlohmann::json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_object() || !doc.contains("subgraphs") || !doc["subgraphs"].is_array()) {
      throw InputError(manifest_path.string() + ": expected an object with a \"subgraphs\" array");
    }
    provenance = doc.value("provenance", "custom");
    for (const auto& s : doc["subgraphs"]) {
      if (!s.contains("types") || !s.contains("file")) throw InputError("graph manifest entry needs types and file");
      const auto types = s["types"].get<std::string>();
      const auto hash = types.find('#');
      if (hash == std::string::npos) throw InputError("graph manifest types must look like a#b, got " + types);
      SubgraphSource src;
      src.type_pair = type_pair_key(types.substr(0, hash), types.substr(hash + 1));
      src.file = dir / s["file"].get<std::string>();
      const auto format = s.value("format", "tsv");
      if (format == "tsv") {
        src.format = GraphFileFormat::tsv;
      } else if (format == "sims") {
        src.format = GraphFileFormat::sims;
      } else {
        throw InputError("unknown graph file format " + format);
      }
      sources.push_back(std::move(src));
    }
  } else {
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      std::string stem = f.filename().string();
      SubgraphSource src;
      src.file = f;
      if (stem.ends_with("_sims.txt")) {
        stem.resize(stem.size() - 9);
        src.format = GraphFileFormat::sims;
      } else if (stem.ends_with(".tsv")) {
        stem.resize(stem.size() - 4);
        src.format = GraphFileFormat::tsv;
      } else {
        continue;
      }
      const auto hash = stem.find('#');
      if (hash == std::string::npos) {
        log::warn("graph_file_skipped", {{"file", f.string()}, {"reason", "name is not <type>#<type>"}});
        continue;
      }
      src.type_pair = type_pair_key(stem.substr(0, hash), stem.substr(hash + 1));
      sources.push_back(std::move(src));
    }
  }
  return from_sources(std::move(sources), std::move(provenance));
}

std::shared_ptr<EntailmentGraph> EntailmentGraph::from_tsv(std::istream& in, std::string provenance) {
  std::shared_ptr<EntailmentGraph> g(new EntailmentGraph());
  g->provenance_ = std::move(provenance);
  std::map<std::string, std::string> lines_by_pair;
  std::string line;
  std::size_t malformed = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto tab = line.find('\t');
    auto p = TypedPredicate::parse(std::string_view(line).substr(0, tab == std::string::npos ? 0 : tab));
    if (!p) {
      ++malformed;
      continue;
    }
    auto& block = lines_by_pair[p->type_pair()];
    block += line;
    block += '\n';
  }
  for (auto& [key, block] : lines_by_pair) {
    auto slot = std::make_unique<Slot>();
    slot->source.type_pair = key;
    slot->preloaded = true;
    slot->graph = std::make_unique<Subgraph>();
    std::istringstream stream(block);
    slot->graph->parse_tsv(stream, "<memory>");
    slot->graph->finish();
    g->slots_.emplace(key, std::move(slot));
  }
  if (malformed > 0) {
    g->unrouted_malformed_ = malformed;
    g->unrouted_diagnostics_.push_back({"malformed_edge", std::to_string(malformed) + " lines without a parseable premise node"});
  }
  if (g->slots_.empty()) log::warn("empty_graph", {{"provenance", g->provenance_}});
  return g;
}

const EntailmentGraph::Subgraph& EntailmentGraph::ensure_loaded(Slot& slot) const {
  if (slot.preloaded) return *slot.graph;
  std::call_once(slot.once, [&] {
    auto g = std::make_unique<Subgraph>();
    std::ifstream in(slot.source.file);
    if (!in) throw InputError("cannot open graph file " + slot.source.file.string());
    const std::string name = slot.source.file.filename().string();
    if (slot.source.format == GraphFileFormat::tsv) {
      g->parse_tsv(in, name);
    } else {
      g->parse_sims(in, name, sims_section_);
    }
    g->finish();
    if (g->stats.edges == 0) log::warn("empty_subgraph", {{"file", slot.source.file.string()}});
    log::emit(log::Level::debug, "subgraph_loaded",
              {{"types", slot.source.type_pair}, {"nodes", g->stats.nodes}, {"edges", g->stats.edges}});
    slot.graph = std::move(g);
  });
  return *slot.graph;
}

const EntailmentGraph::Subgraph* EntailmentGraph::subgraph(std::string_view type_pair) const {
  auto it = slots_.find(type_pair);
  if (it == slots_.end()) return nullptr;
  return &ensure_loaded(*it->second);
}

std::vector<std::string> EntailmentGraph::type_pairs() const {
  std::vector<std::string> out;
  for (const auto& [key, slot] : slots_) out.push_back(key);
  return out;
}

void EntailmentGraph::load_all(unsigned jobs) const {
  std::vector<Slot*> slots;
  for (const auto& [key, slot] : slots_) slots.push_back(slot.get());
  parallel_for(slots.size(), jobs, [&](std::size_t i) { ensure_loaded(*slots[i]); });
}

GraphStats EntailmentGraph::stats() const {
  GraphStats s;
  s.subgraphs = slots_.size();
  s.totals.malformed_lines = unrouted_malformed_;
  for (const auto& [key, slot] : slots_) {
    const Subgraph& g = ensure_loaded(*slot);
    ++s.loaded_subgraphs;
    s.totals.nodes += g.stats.nodes;
    s.totals.edges += g.stats.edges;
    s.totals.malformed_lines += g.stats.malformed_lines;
    s.totals.duplicate_edges += g.stats.duplicate_edges;
    s.totals.approx_bytes += g.stats.approx_bytes;
  }
  return s;
}

Diagnostics EntailmentGraph::diagnostics() const {
  Diagnostics out = unrouted_diagnostics_;
  for (const auto& [key, slot] : slots_) {
    const Subgraph& g = ensure_loaded(*slot);
    out.insert(out.end(), g.diagnostics.begin(), g.diagnostics.end());
  }
  return out;
}

std::optional<double> EntailmentGraph::exact(const TypedPredicate& premise, const TypedPredicate& hypothesis) const {
  const Subgraph* g = subgraph(hypothesis.type_pair());
  if (!g) return std::nullopt;
  // Graphs over a same-type pair tell the slots apart as "<type>_1"/"<type>_2".
  auto spellings = [](const TypedPredicate& t) {
    std::vector<std::string> out{t.node()};
    if (base_type(t.first_type) == base_type(t.second_type)) {
      for (auto [a, b] : {std::pair{"_1", "_2"}, std::pair{"_2", "_1"}}) {
        TypedPredicate v = t;
        v.first_type = base_type(t.first_type) + a;
        v.second_type = base_type(t.second_type) + b;
        out.push_back(v.node());
      }
    }
    return out;
  };
  const auto ps = spellings(premise);
  const auto hs = spellings(hypothesis);
  std::optional<double> best;
  for (std::size_t i = 0; i < std::min(ps.size(), hs.size()); ++i) {
    auto p = g->index.find(ps[i]);
    auto q = g->index.find(hs[i]);
    if (p == g->index.end() || q == g->index.end()) continue;
    const auto& adj = g->out[p->second];
    auto e = adj.find(q->second);
    if (e != adj.end() && (!best || e->second > *best)) best = e->second;
  }
  return best;
}

std::optional<double> EntailmentGraph::fuzzy_in(const Subgraph& g, std::span<const std::string> premise_tokens,
                                                std::span<const std::string> hypothesis_tokens) {
  auto matches = [&](std::span<const std::string> tokens) -> const std::vector<std::uint32_t>* {
    auto it = g.by_surface.find(fuzzy_key(tokens, g.lemmatizer));
    if (it == g.by_surface.end()) it = g.by_surface.find(text::normalize(text::join(tokens)));
    return it == g.by_surface.end() ? nullptr : &it->second;
  };
  const auto* ps = matches(premise_tokens);
  const auto* hs = matches(hypothesis_tokens);
  if (!ps || !hs) return std::nullopt;
  std::optional<double> best;
  for (auto p : *ps) {
    const auto& adj = g.out[p];
    for (auto h : *hs) {
      auto e = adj.find(h);
      if (e != adj.end() && (!best || e->second > *best)) best = e->second;
    }
  }
  return best;
}

std::optional<double> EntailmentGraph::fuzzy(std::span<const std::string> premise_tokens,
                                             std::span<const std::string> hypothesis_tokens,
                                             std::string_view type_pair, bool cross_type) const {
  if (!cross_type) {
    const Subgraph* g = subgraph(type_pair);
    return g ? fuzzy_in(*g, premise_tokens, hypothesis_tokens) : std::nullopt;
  }
  std::optional<double> best;
  for (const auto& [key, slot] : slots_) {
    auto s = fuzzy_in(ensure_loaded(*slot), premise_tokens, hypothesis_tokens);
    if (s && (!best || *s > *best)) best = s;
  }
  return best;
}

EgScorer::EgScorer(std::shared_ptr<const EntailmentGraph> graph, EgScorerOptions options,
                   std::shared_ptr<TypeAssigner> types)
    : graph_(std::move(graph)), options_(options), types_(std::move(types)) {
  if (!types_) types_ = std::make_shared<ConstantTypeAssigner>();
}

std::string EgScorer::identity() const {
  std::string id = "eg:" + graph_->provenance();
  if (options_.fuzzy) id += "+fuzzy";
  if (options_.cross_type) id += "+cross-type";
  return id;
}

ScorerCapabilities EgScorer::capabilities() const { return {1024, false, true}; }

std::string EgScorer::type_of(const std::string& argument) {
  std::lock_guard lock(type_mutex_);
  if (auto it = type_cache_.find(argument); it != type_cache_.end()) return it->second;
  auto t = types_->assign(argument);
  std::string label = t ? base_type(*t) : "thing";
  type_cache_.emplace(argument, label);
  return label;
}

std::optional<double> EgScorer::lookup(const Relation& premise, const Relation& hypothesis) {
  const std::string t1 = type_of(hypothesis.subject), t2 = type_of(hypothesis.object);
  // Evidence shares the hypothesis's argument pair, possibly in the other
  // orientation.
  const bool swapped = premise.subject == hypothesis.object && premise.object == hypothesis.subject &&
                       premise.subject != premise.object;
  const auto p = TypedPredicate::from_tokens(premise.predicate, swapped ? t2 : t1, swapped ? t1 : t2);
  const auto h = TypedPredicate::from_tokens(hypothesis.predicate, t1, t2);
  auto exact = graph_->exact(p, h);
  if (!options_.fuzzy) return exact;
  auto fuzzy = graph_->fuzzy(premise.predicate, hypothesis.predicate, h.type_pair(), options_.cross_type);
  if (exact && (!fuzzy || *exact > *fuzzy)) return exact;
  return fuzzy;
}

std::vector<std::optional<double>> EgScorer::score_batch(std::span<const ScoringItem> items) {
  std::vector<std::optional<double>> out;
  out.reserve(items.size());
  for (const auto& item : items) {
    out.push_back(item.premise_relation ? lookup(*item.premise_relation, item.hypothesis) : std::nullopt);
  }
  return out;
}

}  // namespace booqa
