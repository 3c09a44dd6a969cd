#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "booqa/bench_synthesis.hpp"
#include "booqa/corpus_store.hpp"
#include "booqa/errors.hpp"
#include "booqa/metrics.hpp"
#include "booqa/scorer.hpp"
#include "booqa/tfidf.hpp"

namespace booqa {

enum class RetrievalMode { relation, sentence, tfidf };

RetrievalMode parse_retrieval_mode(std::string_view name);
std::string_view retrieval_mode_name(RetrievalMode mode);

struct EvalConfig {
  RetrievalMode retrieval = RetrievalMode::relation;
  std::size_t evidence_cap = 3200;
  std::size_t tfidf_k = 5;
  unsigned jobs = 1;
  LeftBoundary boundary = LeftBoundary::inclusive;

  void validate() const;
};

struct Evidence {
  std::optional<Relation> relation;  // relation mode only
  std::string text;
  std::string article_id;
  std::string sentence_id;  // empty for whole-article evidence
};

// Retrieval over one corpus. TF-IDF indexes are built per window on first use
// and shared between threads.
class Retriever {
 public:
  Retriever(const CorpusStore& store, EvalConfig config);
  ~Retriever();

  std::vector<Evidence> retrieve(const Proposition& hypothesis) const;

 private:
  struct WindowTfidf;
  const WindowTfidf& tfidf_for(WindowId window) const;

  const CorpusStore& store_;
  EvalConfig config_;
  mutable std::mutex tfidf_mutex_;
  mutable std::vector<std::unique_ptr<WindowTfidf>> tfidf_;
};

struct HypothesisScore {
  std::optional<double> score;
  std::size_t evidence = 0;
  std::size_t scored = 0;
  std::size_t abstained = 0;
  std::size_t failed = 0;
};

// Serializes calls into scorers that are not safe for concurrent use.
class GuardedScorer {
 public:
  explicit GuardedScorer(Scorer& scorer) : scorer_(scorer), caps_(scorer.capabilities()) {}
  std::vector<std::optional<double>> score_batch(std::span<const ScoringItem> items);
  const ScorerCapabilities& capabilities() const { return caps_; }
  Scorer& scorer() { return scorer_; }

 private:
  Scorer& scorer_;
  ScorerCapabilities caps_;
  std::mutex mutex_;
};

// Maximum over evidence of finite, non-abstaining scores. A failed batch is
// retried item by item; items that still fail are skipped with a diagnostic.
HypothesisScore score_hypothesis(const Proposition& hypothesis, std::span<const Evidence> evidence,
                                 GuardedScorer& scorer, Diagnostics* diagnostics = nullptr);
HypothesisScore score_hypothesis(const Proposition& hypothesis, std::span<const Evidence> evidence, Scorer& scorer,
                                 Diagnostics* diagnostics = nullptr);

struct Prediction {
  std::string id;
  bool positive = false;
  std::optional<double> score;
  std::size_t evidence = 0;
};

struct EvalResult {
  std::string scorer;
  EvalConfig config;
  double coverage = 0.0;
  MetricsReport report;
  std::vector<Prediction> predictions;
  Diagnostics diagnostics;
};

// Throws InputError if any proposition refers to a window or source sentence
// the corpus does not contain.
void validate_against_corpus(const Dataset& dataset, const CorpusStore& store);

EvalResult run_eval(const Dataset& dataset, const CorpusStore& store, Scorer& scorer, const EvalConfig& config);

nlohmann::ordered_json eval_result_json(const EvalResult& result);

}  // namespace booqa
