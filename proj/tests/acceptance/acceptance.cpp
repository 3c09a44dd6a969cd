// Runs each acceptance criterion and prints one PASS/FAIL/SKIP line for it.
// Exits non-zero when any criterion fails.
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "booqa/bench_synthesis.hpp"
#include "booqa/eg_scorer.hpp"
#include "booqa/eval_harness.hpp"
#include "booqa/levyholt_mesh.hpp"
#include "booqa/log.hpp"
#include "booqa/metrics.hpp"
#include "booqa/rng.hpp"
#include "booqa/scorer_bridge.hpp"

using namespace booqa;

namespace {

enum class Outcome { pass, fail, skip };

struct Result {
  Outcome outcome = Outcome::pass;
  std::string detail;
};

Result fail(std::string why) { return {Outcome::fail, std::move(why)}; }
Result skip(std::string why) { return {Outcome::skip, std::move(why)}; }

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) return std::nullopt;
  return std::string(v);
}

MetricsReport evaluate(const std::vector<std::optional<double>>& scores, const std::vector<bool>& labels) {
  auto l = std::make_unique<bool[]>(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) l[i] = labels[i];
  return evaluate_scores(scores, std::span<const bool>(l.get(), labels.size()));
}

std::string dump(const Dataset& d) {
  std::ostringstream out;
  write_dataset_jsonl(out, d);
  return out.str();
}

SynthesisConfig scaled_rule() {
  SynthesisConfig c;
  c.min_articles = 2;
  c.min_predicates = 2;
  c.min_argpairs = 2;
  c.seed = 3;
  return c;
}

Result metric_oracle() {
  const auto start = std::chrono::steady_clock::now();
  SeededRng rng(1000);
  double worst = 0.0;
  for (int set = 0; set < 1000; ++set) {
    const std::size_t n = 2 + rng.below(199);
    const std::uint64_t grid = 1 + rng.below(n);
    const double missing = rng.coin() ? 0.0 : 0.2 * rng.unit();
    std::vector<std::optional<double>> scores;
    std::vector<bool> labels;
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(rng.coin());
      if (rng.unit() < missing) {
        scores.emplace_back(std::nullopt);
      } else {
        scores.emplace_back(static_cast<double>(rng.below(grid)) / static_cast<double>(grid));
      }
    }
    labels[0] = true;
    labels[1] = false;
    const auto r = evaluate(scores, labels);
    worst = std::max(worst, std::abs(r.auc_norm - oracle::auc_norm(scores, labels, true)));
    worst = std::max(worst, std::abs(r.auc_50 - oracle::auc_with_floor(scores, labels, 0.5, true)));
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << "1000 sets, max deviation " << worst << ", " << seconds << " s";
  if (worst > 1e-9) return fail(d.str());
  if (seconds >= 10.0) return fail(d.str());
  return {Outcome::pass, d.str()};
}

Result endpoints() {
  std::vector<std::optional<double>> perfect, flat;
  std::vector<bool> labels;
  for (int i = 0; i < 40; ++i) {
    labels.push_back(i % 3 == 0);
    perfect.emplace_back(labels.back() ? 1.0 + i : -1.0 - i);
    flat.emplace_back(0.5);
  }
  const double p = evaluate(perfect, labels).auc_norm;
  const double f = evaluate(flat, labels).auc_norm;
  if (p != 1.0) return fail("perfect ranking gives " + std::to_string(p));
  if (f != 0.0) return fail("constant ranking gives " + std::to_string(f));
  return {Outcome::pass, "perfect 1.0, constant 0.0"};
}

Result synthesis_oracle() {
  std::size_t positives = 0, negatives = 0;
  for (std::uint64_t seed : {7, 11, 19, 23, 31}) {
    const auto c = fixture::news_corpus(seed);
    if (c.articles.size() > 50 || c.triples.size() > 300) return fail("fixture exceeds the size limits");
    const auto synsets = fixture::news_synsets();
    const auto store = CorpusStore::from_records(c.articles, c.triples);
    const auto pop = synthesize_population(store, Lexicon::from_synsets(synsets), {}, scaled_rule());
    const auto expected = oracle::synthesize(c.articles, c.triples, synsets, 3, {2, 2, 2});
    std::set<oracle::PositiveKey> pos;
    std::map<std::string, std::string> key_of;
    for (const auto& p : pop.positives) {
      pos.insert({p.window.value, p.subject, p.object, p.predicate_key()});
      key_of[p.id] = p.predicate_key();
    }
    std::set<oracle::NegativeKey> neg;
    for (const auto& n : pop.negatives) {
      neg.insert({n.window.value, n.subject, n.object, n.predicate_key(), key_of.at(*n.parent_positive_id)});
    }
    if (pos != expected.positives || pos.size() != pop.positives.size()) {
      return fail("positive set differs for corpus seed " + std::to_string(seed));
    }
    if (neg != expected.negatives || neg.size() != pop.negatives.size()) {
      return fail("negative set differs for corpus seed " + std::to_string(seed));
    }
    positives += pos.size();
    negatives += neg.size();
  }
  return {Outcome::pass, "5 corpora, " + std::to_string(positives) + " positives, " + std::to_string(negatives) +
                             " negatives, exact set equality"};
}

Result sampling_invariants() {
  const auto pop = fixture::synthetic_population(12000, 8, 5);
  SamplingConfig sc;
  sc.target_positive_count = 3500;
  sc.seed = 1;
  const auto d = sample_dataset(pop.bundles, sc, pop.window_articles);
  if (dump(d) != dump(sample_dataset(pop.bundles, sc, pop.window_articles))) return fail("rerun differs");

  std::set<std::string> ids;
  std::vector<Proposition> sampled, population;
  for (const auto& b : pop.bundles) population.push_back(b.positive);
  for (const auto& b : d.bundles) {
    if (b.negatives.empty() || b.negatives.size() > 2) return fail("bundle " + b.bundle_id + " has the wrong size");
    ids.insert(b.positive.id);
    for (const auto& n : b.negatives) {
      if (!n.parent_positive_id || !ids.contains(*n.parent_positive_id)) return fail("orphan negative " + n.id);
      sampled.push_back(n);
    }
  }
  std::istringstream back(dump(d));
  read_dataset_jsonl(back);  // rejects orphans and oversize bundles
  if (sampled.size() < 5000) return fail("only " + std::to_string(sampled.size()) + " negatives sampled");
  const auto a = bucket_distribution(sampled, sc.buckets);
  const auto b = bucket_distribution(population, sc.buckets);
  double l1 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) l1 += std::abs(a[i] - b[i]);
  std::ostringstream detail;
  detail << sampled.size() << " negatives, L1 " << l1;
  if (l1 > 0.1) return fail(detail.str());
  return {Outcome::pass, detail.str()};
}

Result mesh_correctness() {
  const auto cases = fixture::mesh_cases();
  std::istringstream in(fixture::mesh_tsv(cases, true));
  PairCollection c;
  c.pairs = read_levyholt_tsv(in, Split::test, "fixture", &c.diagnostics);
  link_converses(c);
  const auto groups = classify_subgroups(c.pairs);
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (!groups[i] || *groups[i] != cases[i].expected) return fail("fixture entry " + std::to_string(i) + " misclassified");
  }
  if (groups.back() || c.unpaired.size() != 1) return fail("entry without converse was not set aside");

  const auto dir = env("LEVYHOLT_DIR");
  if (!dir) return skip("fixture classification matches; set LEVYHOLT_DIR to check the release counts");
  auto release = load_levyholt_dir(*dir);
  fix_split_leakage(release.pairs, 0);
  const auto g = classify_subgroups(release.pairs);
  const std::map<SubGroup, std::array<std::size_t, 3>> expected{{SubGroup::dir_true, {251, 64, 892}},
                                                                {SubGroup::dir_false, {251, 64, 892}},
                                                                {SubGroup::paraphrases, {615, 155, 1939}},
                                                                {SubGroup::unrelated, {3255, 831, 9198}}};
  std::ostringstream detail;
  bool exact = true;
  for (const auto& [group, want] : expected) {
    std::array<std::size_t, 3> got{};
    for (std::size_t i = 0; i < release.pairs.size(); ++i) {
      if (g[i] == group) ++got[static_cast<int>(release.pairs[i].split)];
    }
    detail << subgroup_name(group) << " " << got[0] << "/" << got[1] << "/" << got[2] << "; ";
    exact = exact && got == want;
  }
  if (!exact) return fail(detail.str());
  return {Outcome::pass, detail.str()};
}

Result eg_fuzzy() {
  std::istringstream in(
      "(shop.1,shop.in.2)#person#location\t(go.1,go.to.2)#person#location\t0.3\n"
      "(shop.in.1,shop.in.2)#person#location\t(go.1,go.to.2)#person#location\t0.7\n"
      "(shop.in.1,shop.2)#person#location\t(go.to.1,go.to.2)#person#location\t0.5\n"
      "(go.1,go.to.2)#person#location\t(shop.1,shop.in.2)#person#location\t0.1\n");
  auto g = EntailmentGraph::from_tsv(in, "fixture");
  const std::vector<std::string> shop_in{"shop", "in"}, go_to{"go", "to"};
  // Premise "shop in" matches three nodes, hypothesis "go to" two; the edges
  // between them are 0.3, 0.7 and 0.5.
  if (g->fuzzy(shop_in, go_to, "location#person") != 0.7) return fail("fuzzy maximum is not 0.7");
  if (g->fuzzy(go_to, shop_in, "location#person") != 0.1) return fail("reverse direction is not 0.1");
  const std::vector<std::string> fly{"fly"};
  if (g->fuzzy(fly, go_to, "location#person")) return fail("unmatched predicate did not abstain");

  std::size_t datasets = 0;
  for (std::uint64_t seed : {7, 11, 19}) {
    const auto c = fixture::news_corpus(seed);
    const auto store = CorpusStore::from_records(c.articles, c.triples);
    Dataset d;
    d.bundles = synthesize_population(store, Lexicon::from_synsets(fixture::news_synsets()), {}, scaled_rule()).bundles;
    SeededRng rng(seed);
    const auto keys = store.predicate_keys();
    std::string tsv;
    for (int e = 0; e < 200; ++e) {
      const auto a = text::split_whitespace(keys[rng.below(keys.size())]);
      const auto b = text::split_whitespace(keys[rng.below(keys.size())]);
      auto node = [&](const std::vector<std::string>& w) {
        TypedPredicate t = TypedPredicate::from_tokens(w, "thing", "thing");
        if (rng.coin()) t.first_role = text::join(w, ".") + ".1";
        return t.node();
      };
      tsv += node(a) + "\t" + node(b) + "\t" + std::to_string(rng.unit()) + "\n";
    }
    std::istringstream graph_in(tsv);
    auto graph = EntailmentGraph::from_tsv(graph_in);
    EgScorer exact(graph), fuzzy(graph, {true, false});
    const auto re = run_eval(d, store, exact, {});
    const auto rf = run_eval(d, store, fuzzy, {});
    if (rf.report.recall_ceiling < re.report.recall_ceiling) {
      return fail("fuzzy lowers the recall ceiling on corpus seed " + std::to_string(seed));
    }
    ++datasets;
  }
  return {Outcome::pass, "hand maxima match; recall ceiling monotone on " + std::to_string(datasets) + " datasets"};
}

Result harness_protocol() {
  const auto c = fixture::news_corpus(11);
  const auto store = CorpusStore::from_records(c.articles, c.triples);
  Dataset d;
  d.bundles = synthesize_population(store, Lexicon::from_synsets(fixture::news_synsets()), {}, scaled_rule()).bundles;

  auto client = std::make_shared<BridgeClient>(std::make_unique<ProcessChannel>(std::string(STUB_SCORER)));
  BridgeScorer stub(client, "stub");
  for (auto mode : {RetrievalMode::relation, RetrievalMode::sentence, RetrievalMode::tfidf}) {
    EvalConfig cfg;
    cfg.retrieval = mode;
    const auto base = eval_result_json(run_eval(d, store, stub, cfg)).dump();
    cfg.jobs = 4;
    if (eval_result_json(run_eval(d, store, stub, cfg)).dump() != base) {
      return fail(std::string(retrieval_mode_name(mode)) + ": parallel run differs");
    }
  }

  Retriever retriever(store, {});
  SeededRng rng(8);
  for (const auto& b : d.bundles) {
    auto ev = retriever.retrieve(b.positive);
    const auto base = score_hypothesis(b.positive, ev, stub).score;
    rng.shuffle(std::span(ev));
    if (score_hypothesis(b.positive, ev, stub).score != base) return fail("evidence order changes " + b.positive.id);
  }

  // Every mention of the pair is planted among the hypothesis sources.
  std::size_t checked = 0;
  for (const auto& b : d.bundles) {
    Proposition hyp = b.positive;
    for (const auto& t : store.evidence_for(hyp.pair(), hyp.window, {}, SIZE_MAX)) hyp.source_sentences.push_back(t.origin());
    std::sort(hyp.source_sentences.begin(), hyp.source_sentences.end());
    hyp.source_sentences.erase(std::unique(hyp.source_sentences.begin(), hyp.source_sentences.end()),
                               hyp.source_sentences.end());
    for (auto mode : {RetrievalMode::relation, RetrievalMode::sentence}) {
      EvalConfig cfg;
      cfg.retrieval = mode;
      if (!Retriever(store, cfg).retrieve(hyp).empty()) return fail("planted sources retrieved for " + hyp.id);
    }
    EvalConfig cfg;
    cfg.retrieval = RetrievalMode::tfidf;
    for (const auto& e : Retriever(store, cfg).retrieve(hyp)) {
      for (const auto& s : hyp.source_sentences) {
        if (s.article_id == e.article_id && e.text.find(store.find_sentence(s)->text) != std::string::npos) {
          return fail("planted source sentence in tfidf evidence for " + hyp.id);
        }
      }
    }
    ++checked;
  }
  return {Outcome::pass, "jobs 1 = jobs 4 in all retrieval modes; order invariant; " + std::to_string(checked) +
                             " planted hypotheses retrieve nothing"};
}

Result full_scale() {
  const auto corpus = env("BOOQA_FULL_CORPUS");
  const auto dataset = env("BOOQA_FULL_DATASET");
  const std::vector<std::tuple<const char*, const char*, double>> graphs{
      {"BOOQA_GRAPH_BINC", "BInc", 0.298}, {"BOOQA_GRAPH_CNCE", "CNCE", 0.345}, {"BOOQA_GRAPH_EGT2", "EGT2", 0.268}};
  bool any_graph = false;
  for (const auto& [var, name, want] : graphs) any_graph = any_graph || env(var);
  if (!corpus || !dataset || !any_graph) {
    return skip("needs BOOQA_FULL_CORPUS, BOOQA_FULL_DATASET and at least one BOOQA_GRAPH_* directory");
  }
  const auto store = CorpusStore::load(*corpus);
  std::ifstream din(*dataset);
  const auto d = read_dataset_jsonl(din);
  std::shared_ptr<TypeAssigner> types;
  if (auto t = env("BOOQA_FULL_TYPES")) {
    types = std::make_shared<GazetteerTypeAssigner>(GazetteerTypeAssigner::from_tsv_file(*t));
  }
  std::ostringstream detail;
  bool ok = true;
  for (const auto& [var, name, want] : graphs) {
    const auto dir = env(var);
    if (!dir) continue;
    EgScorer scorer(EntailmentGraph::open_dir(*dir), {true, false}, types);
    EvalConfig cfg;
    cfg.jobs = std::max(1u, std::thread::hardware_concurrency());
    const double got = run_eval(d, store, scorer, cfg).report.auc_norm;
    detail << name << " " << 100.0 * got << " (expected " << 100.0 * want << "); ";
    ok = ok && std::abs(got - want) <= 0.02;
  }
  if (!ok) return fail(detail.str());
  return {Outcome::pass, detail.str()};
}

}  // namespace

int main() {
  log::set_min_level(log::Level::error);
  const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
      {"metric-oracle-equivalence", metric_oracle},
      {"auc-endpoints", endpoints},
      {"synthesis-oracle", synthesis_oracle},
      {"sampling-invariants", sampling_invariants},
      {"mesh-correctness", mesh_correctness},
      {"eg-fuzzy-matching", eg_fuzzy},
      {"harness-protocol", harness_protocol},
      {"full-scale-numbers", full_scale},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Result r;
    try {
      r = check();
    } catch (const std::exception& e) {
      r = fail(std::string("exception: ") + e.what());
    }
    const char* tag = r.outcome == Outcome::pass ? "PASS" : r.outcome == Outcome::fail ? "FAIL" : "SKIP";
    std::cout << tag << ' ' << name << ": " << r.detail << std::endl;
    failures += r.outcome == Outcome::fail;
  }
  return failures == 0 ? 0 : 1;
}
