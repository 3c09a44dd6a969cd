#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "booqa/date.hpp"
#include "booqa/errors.hpp"

namespace booqa {

struct WindowId {
  std::uint32_t value = 0;
  friend auto operator<=>(WindowId, WindowId) = default;
};

struct SentenceRef {
  std::string article_id;
  std::string sentence_id;
  friend auto operator<=>(const SentenceRef&, const SentenceRef&) = default;
};

// Normalized (case-folded, whitespace-collapsed) argument pair. Orientation is
// significant; use unordered() for the orientation-free key.
struct ArgPair {
  std::string subject;
  std::string object;

  ArgPair unordered() const;
  static ArgPair normalized(std::string_view subject, std::string_view object);
  friend auto operator<=>(const ArgPair&, const ArgPair&) = default;
};

struct Sentence {
  std::string sentence_id;
  std::string text;
};

struct Article {
  std::string article_id;
  Date date;
  std::vector<Sentence> sentences;
};

// A triple as it appears in the input stream, before normalization.
struct RawTriple {
  std::string article_id;
  std::string sentence_id;
  std::string subject;
  std::vector<std::string> predicate;
  std::string object;
};

struct RelationTriple {
  std::string subject;
  std::string object;
  std::vector<std::string> predicate;
  std::string article_id;
  std::string sentence_id;
  std::uint32_t sentence_ordinal = 0;  // position of the sentence in its article
  WindowId window;

  std::string predicate_key() const;
  ArgPair pair() const { return {subject, object}; }
  SentenceRef origin() const { return {article_id, sentence_id}; }
};

struct ContextWindow {
  WindowId id;
  Date start;
  Date end;  // inclusive
  std::vector<std::string> article_ids;  // sorted
};

struct WindowPredicateStats {
  std::size_t distinct_articles = 0;
  std::size_t raw_mentions = 0;
};

struct IngestOptions {
  int window_span_days = 3;
  // Articles to drop before windowing, e.g. those used to induce the
  // entailment graphs under evaluation.
  std::unordered_set<std::string> excluded_articles;
};

struct IngestReport {
  std::size_t articles_accepted = 0;
  std::size_t articles_rejected = 0;
  std::size_t articles_excluded = 0;
  std::size_t triples_accepted = 0;
  std::size_t triples_rejected = 0;
  std::size_t triples_duplicate = 0;
  std::size_t triples_excluded = 0;
  Diagnostics diagnostics;
};

// Immutable after construction; all queries are const and safe to call from
// concurrent readers.
class CorpusStore {
 public:
  static CorpusStore ingest(std::istream& articles_jsonl, std::istream& triples_jsonl,
                            const IngestOptions& options = {}, IngestReport* report = nullptr);
  static CorpusStore from_records(std::vector<Article> articles, std::vector<RawTriple> triples,
                                  const IngestOptions& options = {},
                                  IngestReport* report = nullptr);

  static constexpr int kIndexFormatVersion = 1;
  void save(const std::filesystem::path& dir) const;
  static CorpusStore load(const std::filesystem::path& dir);

  int window_span_days() const { return span_days_; }
  std::optional<Date> epoch() const { return epoch_; }
  std::span<const ContextWindow> windows() const { return windows_; }
  const ContextWindow& window(WindowId id) const;
  bool has_window(WindowId id) const { return id.value < windows_.size(); }
  std::optional<WindowId> window_of(Date date) const;

  std::span<const Article> articles() const { return articles_; }
  const Article* find_article(std::string_view article_id) const;
  const Sentence* find_sentence(const SentenceRef& ref) const;

  // All triples in canonical order (window, subject, object, article,
  // sentence ordinal, predicate).
  std::span<const RelationTriple> triples() const { return triples_; }

  // Triple indices of one window, keyed by oriented pair; each list is in
  // (article_id, sentence ordinal, predicate) order.
  const std::map<ArgPair, std::vector<std::uint32_t>>& argpair_index(WindowId id) const;

  std::vector<RelationTriple> evidence_for(const ArgPair& pair, WindowId id,
                                           const std::set<SentenceRef>& excluded,
                                           std::size_t cap) const;

  // Distinct unordered argument pairs the predicate occurs with, corpus-wide.
  std::size_t predicate_argpair_count(std::string_view predicate_key) const;
  std::size_t predicate_mentions(std::string_view predicate_key) const;
  WindowPredicateStats predicate_window_stats(std::string_view predicate_key, WindowId id) const;
  std::vector<std::string> predicate_keys() const;

  bool window_presence(std::span<const std::string> predicate_keys, const ArgPair& pair,
                       WindowId id) const;

 private:
  struct WindowIndex {
    std::map<ArgPair, std::vector<std::uint32_t>> by_pair;
    std::map<ArgPair, std::set<std::string>> predicates_by_pair;
    std::unordered_map<std::string, WindowPredicateStats> predicate_stats;
  };

  struct PredicateTotals {
    std::size_t distinct_pairs = 0;
    std::size_t mentions = 0;
  };

  void build(std::vector<Article> articles, std::vector<RawTriple> triples,
             const IngestOptions& options, IngestReport& report);
  void check_window(WindowId id) const;

  int span_days_ = 3;
  std::optional<Date> epoch_;
  std::vector<Article> articles_;
  std::unordered_map<std::string, std::size_t> article_index_;
  std::unordered_map<std::string, std::unordered_map<std::string, std::uint32_t>> sentence_ordinals_;
  std::vector<RelationTriple> triples_;
  std::vector<ContextWindow> windows_;
  std::vector<WindowIndex> window_indexes_;
  std::unordered_map<std::string, PredicateTotals> predicate_totals_;
};

std::string predicate_key(std::span<const std::string> tokens);

}  // namespace booqa
