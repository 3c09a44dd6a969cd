#include "booqa/levyholt_mesh.hpp"

#include <algorithm>
#include <cassert>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "booqa/log.hpp"
#include "booqa/rng.hpp"
#include "booqa/text.hpp"

namespace booqa {

namespace {

std::optional<Relation> parse_triple(std::string_view s) {
  const auto first = s.find(',');
  const auto last = s.rfind(',');
  if (first == std::string_view::npos || first == last) return std::nullopt;
  Relation r;
  r.subject = text::normalize_whitespace(s.substr(0, first));
  r.predicate = text::split_whitespace(s.substr(first + 1, last - first - 1));
  r.object = text::normalize_whitespace(s.substr(last + 1));
  if (r.subject.empty() || r.object.empty() || r.predicate.empty()) return std::nullopt;
  return r;
}

std::optional<int> parse_label(std::string_view s) {
  const std::string v = text::normalize(s);
  if (v == "true" || v == "1" || v == "yes" || v == "y") return 1;
  if (v == "false" || v == "0" || v == "no" || v == "n") return 0;
  return std::nullopt;
}

std::string relation_key(const Relation& r) { return text::normalize(r.text()); }

constexpr std::array<SubGroup, 4> kMeshOrder{SubGroup::paraphrases, SubGroup::dir_true, SubGroup::dir_false,
                                             SubGroup::unrelated};

int paraphrasticity(SubGroup g) {
  switch (g) {
    case SubGroup::paraphrases:
      return 2;
    case SubGroup::dir_true:
    case SubGroup::dir_false:
      return 1;
    case SubGroup::unrelated:
      return 0;
  }
  return 0;
}

}  // namespace

std::string_view split_name(Split split) {
  switch (split) {
    case Split::train:
      return "train";
    case Split::dev:
      return "dev";
    case Split::test:
      return "test";
  }
  return "train";
}

Split parse_split(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "dev") return Split::dev;
  if (name == "test") return Split::test;
  throw std::invalid_argument("unknown split: " + std::string(name));
}

std::string_view subgroup_name(SubGroup group) {
  switch (group) {
    case SubGroup::paraphrases:
      return "Paraphrases";
    case SubGroup::dir_true:
      return "DirTrue";
    case SubGroup::dir_false:
      return "DirFalse";
    case SubGroup::unrelated:
      return "Unrelated";
  }
  return "Unrelated";
}

SubGroup parse_subgroup(std::string_view name) {
  for (auto g : kMeshOrder) {
    if (subgroup_name(g) == name) return g;
  }
  throw std::invalid_argument("unknown sub-group: " + std::string(name));
}

int subgroup_label(SubGroup group) {
  return group == SubGroup::paraphrases || group == SubGroup::dir_true ? 1 : 0;
}

std::vector<EntailmentPair> read_levyholt_tsv(std::istream& in, Split split, std::string_view source,
                                              Diagnostics* diagnostics) {
  std::vector<EntailmentPair> out;
  std::string line;
  std::size_t line_no = 0, rejected = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::normalize_whitespace(line).empty()) continue;
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      cols.push_back(std::string_view(line).substr(start, tab == std::string::npos ? std::string::npos : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    std::optional<Relation> premise, hypothesis;
    std::optional<int> label;
    if (cols.size() == 3) {
      premise = parse_triple(cols[0]);
      hypothesis = parse_triple(cols[1]);
      label = parse_label(cols[2]);
    }
    if (!premise || !hypothesis || !label) {
      ++rejected;
      if (diagnostics) {
        diagnostics->push_back({"malformed_pair", std::string(source) + ":" + std::to_string(line_no)});
      }
      continue;
    }
    EntailmentPair p;
    p.id = std::string(split_name(split)) + "-" + std::to_string(out.size());
    p.premise = std::move(*premise);
    p.hypothesis = std::move(*hypothesis);
    p.label = *label;
    p.split = split;
    out.push_back(std::move(p));
  }
  if (rejected > 0) log::warn("malformed_pairs", {{"source", source}, {"count", rejected}});
  return out;
}

PairCollection load_levyholt_dir(const std::filesystem::path& dir) {
  PairCollection c;
  bool any = false;
  for (Split split : {Split::train, Split::dev, Split::test}) {
    for (const char* ext : {".txt", ".tsv"}) {
      const auto path = dir / (std::string(split_name(split)) + ext);
      if (!std::filesystem::exists(path)) continue;
      std::ifstream in(path);
      if (!in) throw InputError("cannot open " + path.string());
      auto pairs = read_levyholt_tsv(in, split, path.filename().string(), &c.diagnostics);
      c.pairs.insert(c.pairs.end(), std::make_move_iterator(pairs.begin()), std::make_move_iterator(pairs.end()));
      any = true;
      break;
    }
  }
  if (!any) throw InputError("no train/dev/test files in " + dir.string());
  link_converses(c);
  return c;
}

void link_converses(PairCollection& collection) {
  auto& pairs = collection.pairs;
  std::unordered_map<std::string, std::vector<std::size_t>> by_direction;
  auto key = [](const Relation& a, const Relation& b) { return relation_key(a) + '\t' + relation_key(b); };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    pairs[i].converse.reset();
    by_direction[key(pairs[i].premise, pairs[i].hypothesis)].push_back(i);
  }
  collection.unpaired.clear();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].converse) continue;
    auto it = by_direction.find(key(pairs[i].hypothesis, pairs[i].premise));
    if (it != by_direction.end()) {
      for (std::size_t j : it->second) {
        if (j != i && !pairs[j].converse) {
          pairs[i].converse = j;
          pairs[j].converse = i;
          break;
        }
      }
    }
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].converse) collection.unpaired.push_back(i);
  }
  if (!collection.unpaired.empty()) {
    collection.diagnostics.push_back(
        {"unpaired", std::to_string(collection.unpaired.size()) + " entries have no converse and are left out"});
  }
}

std::vector<std::optional<SubGroup>> classify_subgroups(std::span<const EntailmentPair> pairs) {
  std::vector<std::optional<SubGroup>> out(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].converse || *pairs[i].converse >= pairs.size()) continue;
    const int forward = pairs[i].label, backward = pairs[*pairs[i].converse].label;
    if (forward == 1 && backward == 0) {
      out[i] = SubGroup::dir_true;
    } else if (forward == 0 && backward == 1) {
      out[i] = SubGroup::dir_false;
    } else if (forward == 1) {
      out[i] = SubGroup::paraphrases;
    } else {
      out[i] = SubGroup::unrelated;
    }
  }
  return out;
}

std::size_t fix_split_leakage(std::span<EntailmentPair> pairs, std::uint64_t seed) {
  std::size_t moved = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!pairs[i].converse) continue;
    const std::size_t j = *pairs[i].converse;
    if (j <= i || pairs[i].split == pairs[j].split) continue;
    SeededRng rng(derive_seed(seed, pairs[i].id + "|" + pairs[j].id));
    const Split target = rng.coin() ? pairs[i].split : pairs[j].split;
    pairs[i].split = pairs[j].split = target;
    ++moved;
  }
  return moved;
}

std::string MeshSubset::name() const {
  return std::string(subgroup_name(first)) + "-" + std::string(subgroup_name(second));
}

MeshSubset build_subset(SubGroup first, SubGroup second, std::span<const EntailmentPair> pairs,
                        std::span<const std::optional<SubGroup>> groups) {
  if (first == second) throw std::invalid_argument("a mesh subset needs two different sub-groups");
  if (groups.size() != pairs.size()) throw std::invalid_argument("groups and pairs differ in length");
  MeshSubset subset{first, second, {}};
  const bool same_label = subgroup_label(first) == subgroup_label(second);
  auto label_of = [&](SubGroup g) {
    if (!same_label) return subgroup_label(g);
    const SubGroup other = g == first ? second : first;
    assert(paraphrasticity(g) != paraphrasticity(other));
    return paraphrasticity(g) > paraphrasticity(other) ? 1 : 0;
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!groups[i] || (*groups[i] != first && *groups[i] != second)) continue;
    subset.entries.push_back({i, label_of(*groups[i]), *groups[i]});
  }
  return subset;
}

std::vector<MeshSubset> build_mesh(std::span<const EntailmentPair> pairs,
                                   std::span<const std::optional<SubGroup>> groups) {
  std::vector<MeshSubset> out;
  for (std::size_t a = 0; a < kMeshOrder.size(); ++a) {
    for (std::size_t b = a + 1; b < kMeshOrder.size(); ++b) {
      out.push_back(build_subset(kMeshOrder[a], kMeshOrder[b], pairs, groups));
    }
  }
  return out;
}

void write_subset_jsonl(std::ostream& out, const MeshSubset& subset, std::span<const EntailmentPair> pairs) {
  for (const auto& e : subset.entries) {
    const auto& p = pairs[e.pair];
    nlohmann::ordered_json j;
    j["id"] = p.id;
    j["premise"] = p.premise.text();
    j["hypothesis"] = p.hypothesis.text();
    j["label"] = e.label;
    j["original_label"] = p.label;
    j["subgroup"] = subgroup_name(e.group);
    j["split"] = split_name(p.split);
    out << j.dump() << '\n';
  }
}

std::vector<PromptTemplate> read_prompt_templates(std::istream& in) {
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<PromptTemplate> out;
  // A template line may itself start with "{premise}", so only content that
  // parses as a JSON object is read as a JSON config.
  const auto doc = nlohmann::json::parse(content, nullptr, false);
  if (!doc.is_discarded() && doc.is_object()) {
    if (!doc.contains("templates") || !doc["templates"].is_array()) {
      throw InputError("prompt config must be an object with a \"templates\" array");
    }
    for (const auto& t : doc["templates"]) {
      if (!t.contains("text")) throw InputError("prompt template without text");
      out.push_back({t.value("id", "t" + std::to_string(out.size())), t["text"].get<std::string>()});
    }
  } else {
    std::istringstream lines(content);
    std::string line;
    while (std::getline(lines, line)) {
      if (text::normalize_whitespace(line).empty() || line[0] == '#') continue;
      out.push_back({"t" + std::to_string(out.size()), line});
    }
  }
  for (const auto& t : out) {
    if (t.text.find("{premise}") == std::string::npos || t.text.find("{hypothesis}") == std::string::npos) {
      throw InputError("template " + t.id + " must contain {premise} and {hypothesis}");
    }
  }
  if (out.empty()) throw InputError("no prompt templates");
  return out;
}

std::string render_template(std::string_view text, std::string_view premise, std::string_view hypothesis) {
  std::string out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text.substr(i).starts_with("{premise}")) {
      out += premise;
      i += 9;
    } else if (text.substr(i).starts_with("{hypothesis}")) {
      out += hypothesis;
      i += 12;
    } else {
      out += text[i++];
    }
  }
  return out;
}

std::vector<PromptInstance> render_prompts(const Relation& premise, const Relation& hypothesis,
                                           std::span<const PromptTemplate> templates, bool symmetric) {
  std::vector<PromptInstance> out;
  const std::string p = premise.text(), h = hypothesis.text();
  for (const auto& t : templates) out.push_back({t.id, render_template(t.text, p, h), PromptDirection::forward});
  if (symmetric) {
    for (const auto& t : templates) out.push_back({t.id, render_template(t.text, h, p), PromptDirection::reversed});
  }
  return out;
}

EntailmentPair honly_transform(const EntailmentPair& pair, std::string_view premise_token) {
  EntailmentPair out = pair;
  out.premise = Relation{"", {std::string(premise_token)}, ""};
  return out;
}

Relation mask_arguments(const Relation& relation, TypeAssigner& types, Diagnostics* diagnostics) {
  auto mask = [&](const std::string& argument) {
    auto t = types.assign(argument);
    if (t && !t->empty()) return *t;
    if (diagnostics) diagnostics->push_back({"untyped_argument", argument});
    return std::string("entity");
  };
  return Relation{mask(relation.subject), relation.predicate, mask(relation.object)};
}

SubsplitResult subsplit_dev(std::span<const std::string> hypothesis_texts, std::size_t train_size,
                            std::size_t dev2_size, std::uint64_t seed) {
  SubsplitResult r;
  std::vector<std::vector<std::size_t>> groups;
  std::unordered_map<std::string, std::size_t> group_of;
  for (std::size_t i = 0; i < hypothesis_texts.size(); ++i) {
    auto [it, inserted] = group_of.emplace(text::normalize(hypothesis_texts[i]), groups.size());
    if (inserted) groups.emplace_back();
    groups[it->second].push_back(i);
  }
  SeededRng rng(derive_seed(seed, "subsplit"));
  rng.shuffle(std::span(groups));
  for (auto& g : groups) {
    if (r.train.size() + g.size() <= train_size) {
      r.train.insert(r.train.end(), g.begin(), g.end());
    } else if (r.dev2.size() + g.size() <= dev2_size) {
      r.dev2.insert(r.dev2.end(), g.begin(), g.end());
    } else {
      r.dropped.insert(r.dropped.end(), g.begin(), g.end());
    }
  }
  std::sort(r.train.begin(), r.train.end());
  std::sort(r.dev2.begin(), r.dev2.end());
  std::sort(r.dropped.begin(), r.dropped.end());
  if (r.train.size() < train_size || r.dev2.size() < dev2_size) {
    r.diagnostics.push_back({"subsplit_short", "train " + std::to_string(r.train.size()) + "/" +
                                                   std::to_string(train_size) + ", dev2 " +
                                                   std::to_string(r.dev2.size()) + "/" + std::to_string(dev2_size)});
    log::warn("subsplit_short", {{"train", r.train.size()}, {"dev2", r.dev2.size()}});
  }
  return r;
}

std::array<std::vector<std::size_t>, 2> dedup_across(std::span<const std::string> lhs,
                                                     std::span<const std::string> rhs, std::uint64_t seed) {
  std::unordered_set<std::string> left_keys, right_keys;
  for (const auto& h : lhs) left_keys.insert(text::normalize(h));
  for (const auto& h : rhs) right_keys.insert(text::normalize(h));
  // For keys on both sides: true keeps them left.
  std::unordered_map<std::string, bool> keep_left;
  for (const auto& k : left_keys) {
    if (right_keys.contains(k)) keep_left[k] = SeededRng(derive_seed(seed, k)).coin();
  }
  std::array<std::vector<std::size_t>, 2> out;
  for (std::size_t i = 0; i < lhs.size(); ++i) {
    auto it = keep_left.find(text::normalize(lhs[i]));
    if (it == keep_left.end() || it->second) out[0].push_back(i);
  }
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    auto it = keep_left.find(text::normalize(rhs[i]));
    if (it == keep_left.end() || !it->second) out[1].push_back(i);
  }
  return out;
}

}  // namespace booqa
