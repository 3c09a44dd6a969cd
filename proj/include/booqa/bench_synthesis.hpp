#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "booqa/corpus_store.hpp"
#include "booqa/entity_typing.hpp"
#include "booqa/errors.hpp"
#include "booqa/lexicon.hpp"
#include "booqa/relation.hpp"

namespace booqa {

enum class Label { positive, negative };

std::string_view label_name(Label label);

struct Proposition {
  std::string id;
  std::string bundle_id;
  Label label = Label::positive;
  std::string subject;
  std::string object;
  std::vector<std::string> predicate;
  WindowId window;
  // Sorted and unique. Negatives carry their parent's sentences so that the
  // evaluation can hide them as well.
  std::vector<SentenceRef> source_sentences;
  std::optional<std::string> parent_positive_id;
  std::size_t predicate_frequency = 0;

  std::string predicate_key() const;
  ArgPair pair() const { return {subject, object}; }
  Relation relation() const { return {subject, predicate, object}; }
};

struct NegativeCandidate {
  Proposition proposition;
  // Predicate keys that must all be absent from the window for the pair: the
  // candidate itself and its synonym variants. Sorted.
  std::vector<std::string> absence_predicates;
};

struct Bundle {
  std::string bundle_id;
  Proposition positive;
  std::vector<Proposition> negatives;
};

struct FrequencyBuckets {
  std::vector<std::size_t> boundaries{60,   100,  300,   500,   700,   1000,  1500,
                                      2000, 2500, 3000,  4000,  5000,  6000,  8000,
                                      10000, 15000, 20000, 30000, 50000, 100000};

  // Bucket i holds frequencies in [boundaries[i-1], boundaries[i]); bucket 0
  // is below the first boundary and the last bucket is open-ended.
  std::size_t bucket_of(std::size_t frequency) const;
  std::size_t bucket_count() const { return boundaries.size() + 1; }
  void validate() const;
};

std::vector<std::size_t> bucket_counts(std::span<const Proposition> propositions, const FrequencyBuckets& buckets);
std::vector<double> bucket_distribution(std::span<const Proposition> propositions, const FrequencyBuckets& buckets);

struct SynthesisConfig {
  std::size_t min_articles = 15;
  std::size_t min_predicates = 15;
  std::size_t min_argpairs = 30;
  std::size_t max_negatives = 2;
  bool transitive_hyponyms = false;
  std::uint64_t seed = 0;
};

// Unordered (canonical) pairs mentioned in >= min_articles distinct articles
// and with >= min_predicates distinct predicates inside the window.
std::vector<ArgPair> select_starring_pairs(const CorpusStore& store, WindowId window, std::size_t min_articles,
                                           std::size_t min_predicates);

// One positive per oriented pair and felicitous predicate. Ids are assigned
// here, sequentially within the window.
std::vector<Proposition> select_positives(const CorpusStore& store, WindowId window,
                                          std::span<const ArgPair> starring_pairs, std::size_t min_argpairs);

std::vector<NegativeCandidate> generate_negative_candidates(const Proposition& positive, const Lexicon& lexicon,
                                                            const SynsetSelector& selector,
                                                            std::string_view context_sentence,
                                                            bool transitive_hyponyms = false);

std::vector<Proposition> filter_negatives(std::span<const NegativeCandidate> candidates, const CorpusStore& store,
                                          std::size_t min_argpairs);

// Positives without surviving negatives produce no bundle.
std::vector<Bundle> make_bundles(std::span<const Proposition> positives, std::span<const Proposition> negatives,
                                 std::uint64_t seed, std::size_t max_negatives = 2);

struct Population {
  std::vector<Proposition> positives;
  std::size_t candidate_count = 0;
  std::vector<Proposition> negatives;  // after filtering
  std::vector<Bundle> bundles;
  Diagnostics diagnostics;
};

Population synthesize_population(const CorpusStore& store, const Lexicon& lexicon, const SynsetSelector& selector,
                                 const SynthesisConfig& config, unsigned jobs = 1);

struct SamplingConfig {
  std::size_t target_positive_count = 0;
  FrequencyBuckets buckets;
  std::uint64_t seed = 0;
  // Relative overshoot allowed per bucket quota, rounded up per bucket.
  double bucket_slack = 0.05;
  // Bucket shares of the positive population. Computed from the bundles'
  // positives when absent.
  std::optional<std::vector<double>> reference_distribution;
};

struct Dataset {
  std::vector<Bundle> bundles;
  Diagnostics diagnostics;

  std::size_t positive_count() const { return bundles.size(); }
  std::size_t negative_count() const;
  std::vector<Proposition> propositions() const;
};

Dataset sample_dataset(std::span<const Bundle> bundles, const SamplingConfig& config,
                       const std::map<WindowId, std::size_t>& window_articles);
Dataset sample_dataset(std::span<const Bundle> bundles, const SamplingConfig& config, const CorpusStore& store);

// Windows ending before the boundary go to dev, all others to test.
std::pair<Dataset, Dataset> split_by_time(const Dataset& dataset, Date boundary, const CorpusStore& store);

void write_dataset_jsonl(std::ostream& out, const Dataset& dataset);
Dataset read_dataset_jsonl(std::istream& in);

// Felicitousness review samples with arguments masked by entity type; the
// "felicitous" field is left null for annotators.
void write_audit_sample(std::ostream& out, const Dataset& dataset, std::size_t per_label, TypeAssigner& types,
                        std::uint64_t seed);

}  // namespace booqa
