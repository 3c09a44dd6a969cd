#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "booqa/text.hpp"

namespace booqa {

struct Synset {
  std::string id;
  std::vector<std::string> lemmas;  // normalized; multiword lemmas space-joined
  std::vector<std::string> hyponym_ids;
};

// Half-open token range [start, end).
struct TokenSpan {
  std::size_t start = 0;
  std::size_t end = 0;
  friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct SpanMatch {
  TokenSpan span;
  std::string lemma;                     // the matched lexicon entry
  std::vector<const Synset*> synsets;    // sense order, never empty
};

class Lexicon {
 public:
  static constexpr std::size_t kDefaultMaxSpan = 4;

  // Synsets in file order; a lemma's sense order is the order in which its
  // synsets are listed. Throws InputError on dangling ids or hyponym cycles.
  static Lexicon from_synsets(std::vector<Synset> synsets);

  // {"synsets":[{"id","lemmas":[...],"hyponyms":[...]}]}
  static Lexicon from_json(std::istream& in);
  static Lexicon from_json_file(const std::filesystem::path& path);

  // WordNet 3.x dict directory (data.<pos> and index.<pos>). Hyponym and
  // instance-hyponym pointers are followed; sense order comes from index.<pos>.
  static Lexicon from_wordnet_dir(const std::filesystem::path& dir,
                                  std::span<const std::string> parts_of_speech = {});

  void set_max_span(std::size_t n) { max_span_ = n == 0 ? 1 : n; }
  std::size_t max_span() const { return max_span_; }

  // Left to right by start token, longest span first at each start.
  std::vector<SpanMatch> match_spans(std::span<const std::string> predicate_tokens) const;

  std::vector<std::string> hyponyms(std::string_view synset_id, bool transitive = false) const;

  // Union of lemmas over every synset containing the lemma, plus the lemma.
  std::set<std::string> synonyms(std::string_view lemma) const;

  const Synset& synset(std::string_view id) const;
  const Synset* find_synset(std::string_view id) const;
  std::span<const Synset* const> synsets_for(std::string_view lemma) const;
  std::size_t size() const { return synsets_.size(); }

  const text::Lemmatizer& lemmatizer() const { return lemmatizer_; }

 private:
  void index();

  std::vector<Synset> synsets_;
  std::unordered_map<std::string, std::size_t> by_id_;
  std::unordered_map<std::string, std::vector<const Synset*>> by_lemma_;
  text::Lemmatizer lemmatizer_;
  std::size_t max_span_ = kDefaultMaxSpan;
};

// Word-sense disambiguation hook. Returns the id of the chosen synset, which
// must be one of match.synsets.
class Disambiguator {
 public:
  virtual ~Disambiguator() = default;
  virtual std::string choose(const SpanMatch& match, std::span<const std::string> predicate_tokens,
                             std::string_view context_sentence) = 0;
  virtual bool concurrency_safe() const { return false; }
};

enum class SynsetStrategy { first, external };

SynsetStrategy parse_synset_strategy(std::string_view name);

class SynsetSelector {
 public:
  explicit SynsetSelector(SynsetStrategy strategy = SynsetStrategy::first,
                          std::shared_ptr<Disambiguator> hook = nullptr);

  SynsetStrategy strategy() const { return strategy_; }

  const Synset& select(const SpanMatch& match, std::span<const std::string> predicate_tokens,
                       std::string_view context_sentence) const;

 private:
  SynsetStrategy strategy_;
  std::shared_ptr<Disambiguator> hook_;
  mutable std::mutex hook_mutex_;
};

}  // namespace booqa
