#include "booqa/lexicon.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "booqa/errors.hpp"

namespace booqa {

namespace {

std::string normalize_lemma(std::string_view raw) {
  std::string s(raw);
  // WordNet adjective markers: "(a)", "(p)", "(ip)".
  if (auto paren = s.find('('); paren != std::string::npos && s.back() == ')') s.erase(paren);
  std::replace(s.begin(), s.end(), '_', ' ');
  return text::normalize(s);
}

const std::map<std::string, char> kPosFiles{{"noun", 'n'}, {"verb", 'v'}, {"adj", 'a'}, {"adv", 'r'}};

std::string wordnet_id(const std::string& offset, char pos) {
  if (pos == 's') pos = 'a';
  return offset + "-" + pos;
}

}  // namespace

Lexicon Lexicon::from_synsets(std::vector<Synset> synsets) {
  Lexicon lex;
  lex.synsets_ = std::move(synsets);
  for (auto& s : lex.synsets_) {
    for (auto& l : s.lemmas) l = normalize_lemma(l);
  }
  lex.index();
  return lex;
}

void Lexicon::index() {
  by_id_.clear();
  by_lemma_.clear();
  for (std::size_t i = 0; i < synsets_.size(); ++i) {
    if (!by_id_.emplace(synsets_[i].id, i).second) throw InputError("duplicate synset id " + synsets_[i].id);
  }
  std::unordered_set<std::string> vocabulary;
  for (const auto& s : synsets_) {
    for (const auto& h : s.hyponym_ids) {
      if (!by_id_.contains(h)) throw InputError("synset " + s.id + " has unknown hyponym " + h);
    }
    for (const auto& l : s.lemmas) {
      auto& list = by_lemma_[l];
      if (std::find(list.begin(), list.end(), &s) == list.end()) list.push_back(&s);
      for (auto& tok : text::split_whitespace(l)) vocabulary.insert(std::move(tok));
    }
  }
  lemmatizer_ = text::Lemmatizer(std::move(vocabulary));

  // Reject hyponym cycles (iterative three-colour DFS).
  std::vector<int> colour(synsets_.size(), 0);
  for (std::size_t root = 0; root < synsets_.size(); ++root) {
    if (colour[root]) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
    colour[root] = 1;
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      const auto& hypo = synsets_[node].hyponym_ids;
      if (next == hypo.size()) {
        colour[node] = 2;
        stack.pop_back();
        continue;
      }
      std::size_t child = by_id_.at(hypo[next++]);
      if (colour[child] == 1) throw InputError("hyponym cycle through synset " + synsets_[child].id);
      if (colour[child] == 0) {
        colour[child] = 1;
        stack.emplace_back(child, 0);
      }
    }
  }
}

Lexicon Lexicon::from_json(std::istream& in) {
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("synsets") || !doc["synsets"].is_array()) {
    throw InputError("lexicon JSON must be an object with a \"synsets\" array");
  }
  std::vector<Synset> synsets;
  for (const auto& s : doc["synsets"]) {
    if (!s.contains("id") || !s.contains("lemmas")) throw InputError("synset entry needs id and lemmas");
    Synset syn;
    syn.id = s["id"].get<std::string>();
    syn.lemmas = s["lemmas"].get<std::vector<std::string>>();
    if (s.contains("hyponyms")) syn.hyponym_ids = s["hyponyms"].get<std::vector<std::string>>();
    if (syn.lemmas.empty()) throw InputError("synset " + syn.id + " has no lemmas");
    synsets.push_back(std::move(syn));
  }
  return from_synsets(std::move(synsets));
}

Lexicon Lexicon::from_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open lexicon " + path.string());
  return from_json(in);
}

Lexicon Lexicon::from_wordnet_dir(const std::filesystem::path& dir,
                                  std::span<const std::string> parts_of_speech) {
  std::vector<std::string> wanted(parts_of_speech.begin(), parts_of_speech.end());
  if (wanted.empty()) wanted = {"verb", "noun"};

  std::vector<Synset> synsets;
  std::unordered_map<std::string, std::size_t> position;
  // Sense order per lemma, from index.<pos>.
  std::unordered_map<std::string, std::vector<std::string>> sense_order;

  for (const auto& pos_name : wanted) {
    auto pos_it = kPosFiles.find(pos_name);
    if (pos_it == kPosFiles.end()) throw InputError("unknown WordNet part of speech " + pos_name);
    std::ifstream data(dir / ("data." + pos_name));
    if (!data) throw InputError("cannot open " + (dir / ("data." + pos_name)).string());
    std::string line;
    while (std::getline(data, line)) {
      if (line.empty() || line[0] == ' ') continue;  // license header
      std::string head = line.substr(0, line.find('|'));
      std::istringstream fields(head);
      std::string offset, lex_filenum, ss_type, w_cnt_hex;
      if (!(fields >> offset >> lex_filenum >> ss_type >> w_cnt_hex) || ss_type.empty()) {
        throw InputError("malformed WordNet data line in data." + pos_name);
      }
      Synset syn;
      syn.id = wordnet_id(offset, ss_type[0]);
      const auto w_cnt = std::stoul(w_cnt_hex, nullptr, 16);
      for (unsigned long i = 0; i < w_cnt; ++i) {
        std::string word, lex_id;
        fields >> word >> lex_id;
        syn.lemmas.push_back(normalize_lemma(word));
      }
      std::size_t p_cnt = 0;
      fields >> p_cnt;
      for (std::size_t i = 0; i < p_cnt; ++i) {
        std::string symbol, target, target_pos, source_target;
        fields >> symbol >> target >> target_pos >> source_target;
        if ((symbol == "~" || symbol == "~i") && !target_pos.empty()) {
          syn.hyponym_ids.push_back(wordnet_id(target, target_pos[0]));
        }
      }
      if (!fields) throw InputError("truncated WordNet data line " + offset + " in data." + pos_name);
      position.emplace(syn.id, synsets.size());
      synsets.push_back(std::move(syn));
    }

    std::ifstream idx(dir / ("index." + pos_name));
    if (!idx) continue;  // sense order then falls back to data-file order
    while (std::getline(idx, line)) {
      if (line.empty() || line[0] == ' ') continue;
      std::istringstream fields(line);
      std::string lemma, pos;
      std::size_t synset_cnt = 0, p_cnt = 0;
      fields >> lemma >> pos >> synset_cnt >> p_cnt;
      std::string skip;
      for (std::size_t i = 0; i < p_cnt; ++i) fields >> skip;
      fields >> skip >> skip;  // sense_cnt, tagsense_cnt
      auto& order = sense_order[normalize_lemma(lemma)];
      for (std::size_t i = 0; i < synset_cnt; ++i) {
        std::string off;
        if (fields >> off) order.push_back(wordnet_id(off, pos.empty() ? pos_it->second : pos[0]));
      }
    }
  }
  // Cross-POS pointers (rare for hyponymy) are dropped when the target POS was
  // not loaded.
  for (auto& s : synsets) {
    std::erase_if(s.hyponym_ids, [&](const std::string& h) { return !position.contains(h); });
  }

  Lexicon lex;
  lex.synsets_ = std::move(synsets);
  lex.index();
  for (auto& [lemma, list] : lex.by_lemma_) {
    auto order = sense_order.find(lemma);
    if (order == sense_order.end()) continue;
    auto rank = [&](const Synset* s) {
      auto it = std::find(order->second.begin(), order->second.end(), s->id);
      return static_cast<std::size_t>(it - order->second.begin());
    };
    std::stable_sort(list.begin(), list.end(), [&](const Synset* a, const Synset* b) { return rank(a) < rank(b); });
  }
  return lex;
}

std::vector<SpanMatch> Lexicon::match_spans(std::span<const std::string> predicate_tokens) const {
  std::vector<SpanMatch> out;
  const auto lemmas = lemmatizer_.lemmas(predicate_tokens);
  for (std::size_t start = 0; start < lemmas.size(); ++start) {
    const std::size_t longest = std::min(max_span_, lemmas.size() - start);
    for (std::size_t len = longest; len >= 1; --len) {
      std::string key = text::join(std::span(lemmas).subspan(start, len));
      auto it = by_lemma_.find(key);
      if (it == by_lemma_.end()) {
        // Surface form of the span, in case the lexicon lists an inflected entry.
        key = text::normalize(text::join(predicate_tokens.subspan(start, len)));
        it = by_lemma_.find(key);
      }
      if (it != by_lemma_.end()) out.push_back({{start, start + len}, it->first, it->second});
    }
  }
  return out;
}

std::vector<std::string> Lexicon::hyponyms(std::string_view synset_id, bool transitive) const {
  const Synset& root = synset(synset_id);
  std::vector<std::string> out;
  std::unordered_set<std::string> seen_lemmas;
  std::unordered_set<std::string> seen_synsets{root.id};
  std::deque<const Synset*> queue;
  for (const auto& h : root.hyponym_ids) {
    if (seen_synsets.insert(h).second) queue.push_back(&synset(h));
  }
  while (!queue.empty()) {
    const Synset* s = queue.front();
    queue.pop_front();
    for (const auto& l : s->lemmas) {
      if (seen_lemmas.insert(l).second) out.push_back(l);
    }
    if (!transitive) continue;
    for (const auto& h : s->hyponym_ids) {
      if (seen_synsets.insert(h).second) queue.push_back(&synset(h));
    }
  }
  return out;
}

std::set<std::string> Lexicon::synonyms(std::string_view lemma) const {
  std::string key = text::normalize(lemma);
  std::set<std::string> out{key};
  auto it = by_lemma_.find(key);
  if (it == by_lemma_.end()) return out;
  for (const Synset* s : it->second) out.insert(s->lemmas.begin(), s->lemmas.end());
  return out;
}

const Synset& Lexicon::synset(std::string_view id) const {
  const Synset* s = find_synset(id);
  if (!s) throw LookupError("unknown synset " + std::string(id));
  return *s;
}

const Synset* Lexicon::find_synset(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &synsets_[it->second];
}

std::span<const Synset* const> Lexicon::synsets_for(std::string_view lemma) const {
  auto it = by_lemma_.find(text::normalize(lemma));
  if (it == by_lemma_.end()) return {};
  return it->second;
}

SynsetStrategy parse_synset_strategy(std::string_view name) {
  if (name == "first") return SynsetStrategy::first;
  if (name == "external") return SynsetStrategy::external;
  throw std::invalid_argument("unknown synset strategy: " + std::string(name));
}

SynsetSelector::SynsetSelector(SynsetStrategy strategy, std::shared_ptr<Disambiguator> hook)
    : strategy_(strategy), hook_(std::move(hook)) {}

const Synset& SynsetSelector::select(const SpanMatch& match, std::span<const std::string> predicate_tokens,
                                     std::string_view context_sentence) const {
  if (match.synsets.empty()) throw std::invalid_argument("span match without candidate synsets");
  if (strategy_ == SynsetStrategy::external && !hook_) {
    throw std::logic_error("external synset strategy requires a registered disambiguator");
  }
  if (match.synsets.size() == 1 || strategy_ == SynsetStrategy::first) return *match.synsets.front();

  std::string chosen;
  if (hook_->concurrency_safe()) {
    chosen = hook_->choose(match, predicate_tokens, context_sentence);
  } else {
    std::lock_guard lock(hook_mutex_);
    chosen = hook_->choose(match, predicate_tokens, context_sentence);
  }
  for (const Synset* s : match.synsets) {
    if (s->id == chosen) return *s;
  }
  throw ScorerError("disambiguator chose synset '" + chosen + "' outside the candidate set");
}

}  // namespace booqa
