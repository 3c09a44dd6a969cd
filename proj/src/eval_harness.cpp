#include "booqa/eval_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

#include "booqa/log.hpp"
#include "booqa/parallel.hpp"

namespace booqa {

RetrievalMode parse_retrieval_mode(std::string_view name) {
  if (name == "relation") return RetrievalMode::relation;
  if (name == "sentence") return RetrievalMode::sentence;
  if (name == "tfidf") return RetrievalMode::tfidf;
  throw std::invalid_argument("unknown retrieval mode: " + std::string(name));
}

std::string_view retrieval_mode_name(RetrievalMode mode) {
  switch (mode) {
    case RetrievalMode::relation:
      return "relation";
    case RetrievalMode::sentence:
      return "sentence";
    case RetrievalMode::tfidf:
      return "tfidf";
  }
  return "relation";
}

void EvalConfig::validate() const {
  if (evidence_cap == 0) throw std::invalid_argument("evidence cap must be at least 1");
  if (tfidf_k == 0) throw std::invalid_argument("tfidf k must be at least 1");
}

struct Retriever::WindowTfidf {
  std::vector<const Article*> articles;
  std::unique_ptr<TfidfIndex> index;
};

Retriever::Retriever(const CorpusStore& store, EvalConfig config) : store_(store), config_(config) {
  config_.validate();
  tfidf_.resize(store_.windows().size());
}

Retriever::~Retriever() = default;

const Retriever::WindowTfidf& Retriever::tfidf_for(WindowId window) const {
  std::lock_guard lock(tfidf_mutex_);
  auto& slot = tfidf_[window.value];
  if (!slot) {
    auto built = std::make_unique<WindowTfidf>();
    std::vector<std::string> texts;
    for (const auto& id : store_.window(window).article_ids) {
      const Article* a = store_.find_article(id);
      built->articles.push_back(a);
      std::string body;
      for (const auto& s : a->sentences) {
        if (!body.empty()) body += ' ';
        body += s.text;
      }
      texts.push_back(std::move(body));
    }
    built->index = std::make_unique<TfidfIndex>(texts);
    slot = std::move(built);
  }
  return *slot;
}

std::vector<Evidence> Retriever::retrieve(const Proposition& hypothesis) const {
  if (!store_.has_window(hypothesis.window)) {
    throw LookupError("hypothesis " + hypothesis.id + " refers to unknown window " +
                      std::to_string(hypothesis.window.value));
  }
  const std::set<SentenceRef> excluded(hypothesis.source_sentences.begin(), hypothesis.source_sentences.end());
  std::vector<Evidence> out;

  if (config_.retrieval == RetrievalMode::tfidf) {
    const auto& w = tfidf_for(hypothesis.window);
    const std::string query = hypothesis.relation().text();
    auto sims = w.index->similarities(query);
    std::vector<std::string> bodies(w.articles.size());
    for (std::size_t d = 0; d < w.articles.size(); ++d) {
      const Article* a = w.articles[d];
      bool touched = false;
      std::string body;
      for (const auto& s : a->sentences) {
        if (excluded.contains({a->article_id, s.sentence_id})) {
          touched = true;
          continue;
        }
        if (!body.empty()) body += ' ';
        body += s.text;
      }
      if (touched) sims[d] = w.index->similarity(query, body);
      bodies[d] = std::move(body);
    }
    std::vector<std::size_t> order(sims.size());
    for (std::size_t d = 0; d < order.size(); ++d) order[d] = d;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sims[a] > sims[b]; });
    const std::size_t k = std::min({config_.tfidf_k, config_.evidence_cap, order.size()});
    for (std::size_t i = 0; i < k; ++i) {
      const std::size_t d = order[i];
      if (bodies[d].empty()) continue;
      out.push_back({std::nullopt, std::move(bodies[d]), w.articles[d]->article_id, ""});
    }
    return out;
  }

  const auto triples =
      store_.evidence_for(hypothesis.pair(), hypothesis.window, excluded,
                          config_.retrieval == RetrievalMode::relation ? config_.evidence_cap : SIZE_MAX);
  if (config_.retrieval == RetrievalMode::relation) {
    out.reserve(triples.size());
    for (const auto& t : triples) {
      Relation r{t.subject, t.predicate, t.object};
      std::string rendered = r.text();
      out.push_back({std::move(r), std::move(rendered), t.article_id, t.sentence_id});
    }
    return out;
  }

  std::set<SentenceRef> seen;
  for (const auto& t : triples) {
    if (out.size() >= config_.evidence_cap) break;
    if (!seen.insert(t.origin()).second) continue;
    const Sentence* s = store_.find_sentence(t.origin());
    if (!s) continue;
    out.push_back({std::nullopt, s->text, t.article_id, t.sentence_id});
  }
  return out;
}

std::vector<std::optional<double>> GuardedScorer::score_batch(std::span<const ScoringItem> items) {
  if (caps_.concurrency_safe) return scorer_.score_batch(items);
  std::lock_guard lock(mutex_);
  return scorer_.score_batch(items);
}

HypothesisScore score_hypothesis(const Proposition& hypothesis, std::span<const Evidence> evidence,
                                 GuardedScorer& scorer, Diagnostics* diagnostics) {
  HypothesisScore result;
  result.evidence = evidence.size();
  const Relation hyp = hypothesis.relation();
  const std::string hyp_text = hyp.text();
  const std::size_t batch = std::max<std::size_t>(1, scorer.capabilities().batch_size);

  auto absorb = [&](std::optional<double> s) {
    if (!s || !std::isfinite(*s)) {
      ++result.abstained;
      return;
    }
    ++result.scored;
    if (!result.score || *s > *result.score) result.score = *s;
  };
  auto call = [&](std::span<const ScoringItem> items) {
    auto scores = scorer.score_batch(items);
    if (scores.size() != items.size()) {
      throw ScorerError("scorer returned " + std::to_string(scores.size()) + " scores for " +
                        std::to_string(items.size()) + " items");
    }
    return scores;
  };

  std::vector<ScoringItem> items;
  for (std::size_t start = 0; start < evidence.size(); start += batch) {
    const std::size_t end = std::min(evidence.size(), start + batch);
    items.clear();
    for (std::size_t i = start; i < end; ++i) items.push_back({evidence[i].relation, evidence[i].text, hyp, hyp_text});
    try {
      for (auto s : call(items)) absorb(s);
      continue;
    } catch (const ScorerError& e) {
      if (items.size() == 1) {
        ++result.failed;
        if (diagnostics) diagnostics->push_back({"scorer_item_failed", hypothesis.id + ": " + e.what()});
        continue;
      }
    }
    for (const auto& item : items) {
      try {
        absorb(call(std::span(&item, 1)).front());
      } catch (const ScorerError& e) {
        ++result.failed;
        if (diagnostics) diagnostics->push_back({"scorer_item_failed", hypothesis.id + ": " + e.what()});
      }
    }
  }
  return result;
}

HypothesisScore score_hypothesis(const Proposition& hypothesis, std::span<const Evidence> evidence, Scorer& scorer,
                                 Diagnostics* diagnostics) {
  GuardedScorer guarded(scorer);
  return score_hypothesis(hypothesis, evidence, guarded, diagnostics);
}

void validate_against_corpus(const Dataset& dataset, const CorpusStore& store) {
  auto check = [&](const Proposition& p) {
    if (!store.has_window(p.window)) {
      throw InputError("proposition " + p.id + " refers to window " + std::to_string(p.window.value) +
                       " which the corpus index does not contain");
    }
    for (const auto& s : p.source_sentences) {
      if (!store.find_sentence(s)) {
        throw InputError("proposition " + p.id + " cites sentence " + s.article_id + "/" + s.sentence_id +
                         " which the corpus index does not contain");
      }
    }
  };
  for (const auto& b : dataset.bundles) {
    check(b.positive);
    for (const auto& n : b.negatives) check(n);
  }
}

EvalResult run_eval(const Dataset& dataset, const CorpusStore& store, Scorer& scorer, const EvalConfig& config) {
  config.validate();
  validate_against_corpus(dataset, store);
  const auto hypotheses = dataset.propositions();
  if (hypotheses.empty()) throw InputError("dataset is empty");

  Retriever retriever(store, config);
  GuardedScorer guarded(scorer);
  std::vector<HypothesisScore> scores(hypotheses.size());
  std::vector<Diagnostics> per_item(hypotheses.size());
  parallel_for(hypotheses.size(), config.jobs, [&](std::size_t i) {
    const auto evidence = retriever.retrieve(hypotheses[i]);
    scores[i] = score_hypothesis(hypotheses[i], evidence, guarded, &per_item[i]);
  });

  EvalResult result;
  result.scorer = scorer.identity();
  result.config = config;
  std::vector<std::optional<double>> ranked(hypotheses.size());
  // vector<bool> cannot back a span.
  auto labels = std::make_unique<bool[]>(hypotheses.size());
  std::size_t covered = 0, attempted = 0, failed = 0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    ranked[i] = scores[i].score;
    labels[i] = hypotheses[i].label == Label::positive;
    if (scores[i].score) ++covered;
    attempted += scores[i].evidence;
    failed += scores[i].failed;
    result.predictions.push_back({hypotheses[i].id, labels[i], scores[i].score, scores[i].evidence});
    for (auto& d : per_item[i]) result.diagnostics.push_back(std::move(d));
  }
  if (attempted > 0 && failed == attempted) {
    throw ScorerError("scorer " + result.scorer + " failed on every one of " + std::to_string(attempted) +
                      " evidence items");
  }
  result.report = evaluate_scores(ranked, std::span<const bool>(labels.get(), hypotheses.size()), config.boundary);
  result.coverage = static_cast<double>(covered) / static_cast<double>(hypotheses.size());
  log::info("eval_done", {{"scorer", result.scorer},
                          {"hypotheses", hypotheses.size()},
                          {"coverage", result.coverage},
                          {"auc_norm", result.report.auc_norm},
                          {"failed_items", failed}});
  return result;
}

nlohmann::ordered_json eval_result_json(const EvalResult& result) {
  nlohmann::ordered_json j;
  j["scorer"] = result.scorer;
  j["retrieval"] = retrieval_mode_name(result.config.retrieval);
  j["cap"] = result.config.evidence_cap;
  j["tfidf_k"] = result.config.tfidf_k;
  j["boundary"] = left_boundary_name(result.config.boundary);
  j["coverage"] = result.coverage;
  j["recall_ceiling"] = result.report.recall_ceiling;
  nlohmann::ordered_json report;
  report["positives"] = result.report.positives;
  report["negatives"] = result.report.negatives;
  report["xi"] = result.report.xi;
  report["auc_xi"] = result.report.auc_xi;
  report["auc_norm"] = result.report.auc_norm;
  report["auc_50"] = result.report.auc_50;
  auto curve = nlohmann::ordered_json::array();
  for (const auto& p : result.report.curve) curve.push_back({p.recall, p.precision});
  report["curve"] = std::move(curve);
  j["report"] = std::move(report);
  auto preds = nlohmann::ordered_json::array();
  for (const auto& p : result.predictions) {
    nlohmann::ordered_json e;
    e["id"] = p.id;
    e["label"] = p.positive ? 1 : 0;
    e["score"] = p.score ? nlohmann::ordered_json(*p.score) : nlohmann::ordered_json(nullptr);
    e["evidence"] = p.evidence;
    preds.push_back(std::move(e));
  }
  j["predictions"] = std::move(preds);
  auto diags = nlohmann::ordered_json::array();
  for (const auto& d : result.diagnostics) diags.push_back({{"code", d.code}, {"message", d.message}});
  j["diagnostics"] = std::move(diags);
  return j;
}

}  // namespace booqa
