#include "booqa/bench_synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "booqa/log.hpp"
#include "booqa/parallel.hpp"
#include "booqa/rng.hpp"
#include "booqa/text.hpp"

namespace booqa {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string id_tail(const std::string& positive_id) {
  return positive_id.starts_with("P-") ? positive_id.substr(2) : positive_id;
}

std::string bundle_id_for(const std::string& positive_id) { return "B-" + id_tail(positive_id); }

// Hamilton apportionment of `total` seats by weight; remainder ties go to the
// lower index. All-zero weights give all-zero seats.
std::vector<std::size_t> largest_remainder(std::span<const double> weights, std::size_t total) {
  std::vector<std::size_t> seats(weights.size(), 0);
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (sum <= 0.0 || total == 0) return seats;
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = static_cast<double>(total) * weights[i] / sum;
    seats[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += seats[i];
    remainders.emplace_back(exact - std::floor(exact), i);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total && k < remainders.size(); ++k, ++assigned) {
    ++seats[remainders[k].second];
  }
  return seats;
}

// Proportional quotas capped by availability; seats a capped entry cannot
// take are redistributed over the rest.
std::vector<std::size_t> capped_quotas(std::span<const double> weights, std::span<const std::size_t> available,
                                       std::size_t target) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> quota(n, 0);
  std::vector<bool> fixed(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (available[i] == 0) fixed[i] = true;
  }
  for (;;) {
    std::size_t taken = 0;
    std::vector<double> w(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) {
        taken += quota[i];
      } else {
        w[i] = weights[i];
      }
    }
    if (taken >= target) break;
    auto alloc = largest_remainder(w, target - taken);
    bool over = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (!fixed[i] && alloc[i] > available[i]) {
        quota[i] = available[i];
        fixed[i] = true;
        over = true;
      }
    }
    if (!over) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!fixed[i]) quota[i] = alloc[i];
      }
      break;
    }
    if (std::all_of(fixed.begin(), fixed.end(), [](bool f) { return f; })) break;
  }
  return quota;
}

ordered_json proposition_json(const Proposition& p) {
  ordered_json j;
  j["id"] = p.id;
  j["bundle_id"] = p.bundle_id;
  j["label"] = label_name(p.label);
  j["subject"] = p.subject;
  j["object"] = p.object;
  j["predicate"] = p.predicate;
  j["window_id"] = p.window.value;
  j["parent_positive_id"] = p.parent_positive_id ? ordered_json(*p.parent_positive_id) : ordered_json(nullptr);
  auto sources = ordered_json::array();
  for (const auto& s : p.source_sentences) sources.push_back({s.article_id, s.sentence_id});
  j["source_sentences"] = std::move(sources);
  j["predicate_frequency"] = p.predicate_frequency;
  return j;
}

std::string json_id(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw InputError("expected a string or integer identifier");
}

Proposition parse_proposition(const std::string& line, std::size_t line_no) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  auto fail = [&](const std::string& what) {
    return InputError("dataset line " + std::to_string(line_no) + ": " + what);
  };
  if (j.is_discarded() || !j.is_object()) throw fail("not a JSON object");
  for (const char* key : {"id", "bundle_id", "label", "subject", "object", "predicate", "window_id",
                          "source_sentences"}) {
    if (!j.contains(key)) throw fail(std::string("missing field ") + key);
  }
  Proposition p;
  try {
    p.id = j["id"].get<std::string>();
    p.bundle_id = j["bundle_id"].get<std::string>();
    const auto label = j["label"].get<std::string>();
    if (label == "positive") {
      p.label = Label::positive;
    } else if (label == "negative") {
      p.label = Label::negative;
    } else {
      throw fail("unknown label " + label);
    }
    p.subject = j["subject"].get<std::string>();
    p.object = j["object"].get<std::string>();
    p.predicate = j["predicate"].get<std::vector<std::string>>();
    const auto w = j["window_id"].get<long long>();
    if (w < 0 || w > static_cast<long long>(UINT32_MAX)) throw fail("window_id out of range");
    p.window = WindowId{static_cast<std::uint32_t>(w)};
    for (const auto& s : j["source_sentences"]) {
      if (!s.is_array() || s.size() != 2) throw fail("source_sentences entries must be [article, sentence]");
      p.source_sentences.push_back({json_id(s[0]), json_id(s[1])});
    }
    if (j.contains("parent_positive_id") && !j["parent_positive_id"].is_null()) {
      p.parent_positive_id = j["parent_positive_id"].get<std::string>();
    }
    if (j.contains("predicate_frequency")) p.predicate_frequency = j["predicate_frequency"].get<std::size_t>();
  } catch (const nlohmann::json::exception& e) {
    throw fail(e.what());
  }
  std::sort(p.source_sentences.begin(), p.source_sentences.end());
  p.source_sentences.erase(std::unique(p.source_sentences.begin(), p.source_sentences.end()),
                           p.source_sentences.end());
  if (p.predicate.empty()) throw fail("empty predicate");
  if (p.label == Label::negative && !p.parent_positive_id) throw fail("negative without parent_positive_id");
  return p;
}

}  // namespace

std::string_view label_name(Label label) { return label == Label::positive ? "positive" : "negative"; }

std::string Proposition::predicate_key() const { return booqa::predicate_key(predicate); }

std::size_t FrequencyBuckets::bucket_of(std::size_t frequency) const {
  return static_cast<std::size_t>(std::upper_bound(boundaries.begin(), boundaries.end(), frequency) -
                                  boundaries.begin());
}

void FrequencyBuckets::validate() const {
  if (!std::is_sorted(boundaries.begin(), boundaries.end()) ||
      std::adjacent_find(boundaries.begin(), boundaries.end()) != boundaries.end()) {
    throw std::invalid_argument("frequency bucket boundaries must be strictly increasing");
  }
}

std::vector<std::size_t> bucket_counts(std::span<const Proposition> propositions, const FrequencyBuckets& buckets) {
  std::vector<std::size_t> counts(buckets.bucket_count(), 0);
  for (const auto& p : propositions) ++counts[buckets.bucket_of(p.predicate_frequency)];
  return counts;
}

std::vector<double> bucket_distribution(std::span<const Proposition> propositions, const FrequencyBuckets& buckets) {
  auto counts = bucket_counts(propositions, buckets);
  std::vector<double> dist(counts.size(), 0.0);
  if (propositions.empty()) return dist;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    dist[i] = static_cast<double>(counts[i]) / static_cast<double>(propositions.size());
  }
  return dist;
}

std::vector<ArgPair> select_starring_pairs(const CorpusStore& store, WindowId window, std::size_t min_articles,
                                           std::size_t min_predicates) {
  struct Tally {
    std::set<std::string> articles;
    std::set<std::string> predicates;
  };
  std::map<ArgPair, Tally> tallies;
  const auto triples = store.triples();
  for (const auto& [pair, indices] : store.argpair_index(window)) {
    auto& tally = tallies[pair.unordered()];
    for (auto i : indices) {
      tally.articles.insert(triples[i].article_id);
      tally.predicates.insert(triples[i].predicate_key());
    }
  }
  std::vector<ArgPair> out;
  for (const auto& [pair, tally] : tallies) {
    if (tally.articles.size() >= min_articles && tally.predicates.size() >= min_predicates) out.push_back(pair);
  }
  return out;
}

std::vector<Proposition> select_positives(const CorpusStore& store, WindowId window,
                                          std::span<const ArgPair> starring_pairs, std::size_t min_argpairs) {
  std::vector<Proposition> out;
  const auto& index = store.argpair_index(window);
  const auto triples = store.triples();
  std::size_t next = 0;
  for (const auto& starring : starring_pairs) {
    std::vector<ArgPair> orientations{starring};
    if (starring.object != starring.subject) orientations.push_back({starring.object, starring.subject});
    for (const auto& oriented : orientations) {
      auto it = index.find(oriented);
      if (it == index.end()) continue;
      std::map<std::string, std::pair<std::vector<std::string>, std::set<SentenceRef>>> by_predicate;
      for (auto i : it->second) {
        auto& [tokens, sources] = by_predicate[triples[i].predicate_key()];
        if (tokens.empty()) tokens = triples[i].predicate;
        sources.insert(triples[i].origin());
      }
      for (auto& [key, entry] : by_predicate) {
        const std::size_t freq = store.predicate_argpair_count(key);
        if (freq < min_argpairs) continue;
        Proposition p;
        p.id = "P-" + std::to_string(window.value) + "-" + std::to_string(next++);
        p.label = Label::positive;
        p.subject = oriented.subject;
        p.object = oriented.object;
        p.predicate = entry.first;
        p.window = window;
        p.source_sentences.assign(entry.second.begin(), entry.second.end());
        p.predicate_frequency = freq;
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

std::vector<NegativeCandidate> generate_negative_candidates(const Proposition& positive, const Lexicon& lexicon,
                                                            const SynsetSelector& selector,
                                                            std::string_view context_sentence,
                                                            bool transitive_hyponyms) {
  std::vector<NegativeCandidate> out;
  std::unordered_map<std::string, std::size_t> by_key;
  const std::string positive_key = positive.predicate_key();
  const auto& tokens = positive.predicate;

  auto replaced = [&](const TokenSpan& span, const std::string& lemma) {
    std::vector<std::string> result(tokens.begin(), tokens.begin() + static_cast<std::ptrdiff_t>(span.start));
    for (auto& t : text::split_whitespace(lemma)) result.push_back(std::move(t));
    result.insert(result.end(), tokens.begin() + static_cast<std::ptrdiff_t>(span.end), tokens.end());
    return result;
  };

  std::size_t ordinal = 0;
  for (const auto& match : lexicon.match_spans(tokens)) {
    const Synset& chosen = selector.select(match, tokens, context_sentence);
    for (const auto& hyponym : lexicon.hyponyms(chosen.id, transitive_hyponyms)) {
      auto candidate_tokens = replaced(match.span, hyponym);
      const std::string key = predicate_key(candidate_tokens);
      if (key == positive_key) continue;

      std::set<std::string> absence;
      for (const auto& synonym : lexicon.synonyms(hyponym)) absence.insert(predicate_key(replaced(match.span, synonym)));
      for (const auto& synonym : lexicon.synonyms(key)) absence.insert(synonym);
      absence.insert(key);

      if (auto it = by_key.find(key); it != by_key.end()) {
        auto& merged = out[it->second].absence_predicates;
        absence.insert(merged.begin(), merged.end());
        merged.assign(absence.begin(), absence.end());
        continue;
      }
      NegativeCandidate c;
      c.proposition.id = "N-" + id_tail(positive.id) + "-" + std::to_string(ordinal++);
      c.proposition.label = Label::negative;
      c.proposition.subject = positive.subject;
      c.proposition.object = positive.object;
      c.proposition.predicate = std::move(candidate_tokens);
      c.proposition.window = positive.window;
      c.proposition.source_sentences = positive.source_sentences;
      c.proposition.parent_positive_id = positive.id;
      c.absence_predicates.assign(absence.begin(), absence.end());
      by_key.emplace(key, out.size());
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<Proposition> filter_negatives(std::span<const NegativeCandidate> candidates, const CorpusStore& store,
                                          std::size_t min_argpairs) {
  std::vector<Proposition> out;
  for (const auto& c : candidates) {
    const auto& p = c.proposition;
    const std::size_t freq = store.predicate_argpair_count(p.predicate_key());
    if (freq < min_argpairs) continue;
    if (store.window_presence(c.absence_predicates, p.pair(), p.window)) continue;
    Proposition kept = p;
    kept.predicate_frequency = freq;
    out.push_back(std::move(kept));
  }
  return out;
}

std::vector<Bundle> make_bundles(std::span<const Proposition> positives, std::span<const Proposition> negatives,
                                 std::uint64_t seed, std::size_t max_negatives) {
  std::unordered_map<std::string, std::vector<const Proposition*>> by_parent;
  for (const auto& n : negatives) {
    if (n.parent_positive_id) by_parent[*n.parent_positive_id].push_back(&n);
  }
  std::vector<Bundle> out;
  for (const auto& positive : positives) {
    auto it = by_parent.find(positive.id);
    if (it == by_parent.end() || it->second.empty() || max_negatives == 0) continue;
    std::vector<std::size_t> order(it->second.size());
    std::iota(order.begin(), order.end(), 0);
    if (order.size() > max_negatives) {
      SeededRng rng(derive_seed(seed, positive.id));
      for (std::size_t k = 0; k < max_negatives; ++k) {
        std::swap(order[k], order[k + rng.below(order.size() - k)]);
      }
      order.resize(max_negatives);
      std::sort(order.begin(), order.end());
    }
    Bundle b;
    b.bundle_id = bundle_id_for(positive.id);
    b.positive = positive;
    b.positive.bundle_id = b.bundle_id;
    for (auto k : order) {
      Proposition n = *it->second[k];
      n.bundle_id = b.bundle_id;
      b.negatives.push_back(std::move(n));
    }
    out.push_back(std::move(b));
  }
  return out;
}

Population synthesize_population(const CorpusStore& store, const Lexicon& lexicon, const SynsetSelector& selector,
                                 const SynthesisConfig& config, unsigned jobs) {
  Population pop;
  for (const auto& w : store.windows()) {
    auto starring = select_starring_pairs(store, w.id, config.min_articles, config.min_predicates);
    auto positives = select_positives(store, w.id, starring, config.min_argpairs);
    pop.positives.insert(pop.positives.end(), std::make_move_iterator(positives.begin()),
                         std::make_move_iterator(positives.end()));
  }

  std::vector<std::vector<Proposition>> kept(pop.positives.size());
  std::vector<std::size_t> generated(pop.positives.size(), 0);
  parallel_for(pop.positives.size(), jobs, [&](std::size_t i) {
    const auto& positive = pop.positives[i];
    std::string context;
    if (!positive.source_sentences.empty()) {
      if (const Sentence* s = store.find_sentence(positive.source_sentences.front())) context = s->text;
    }
    auto candidates = generate_negative_candidates(positive, lexicon, selector, context, config.transitive_hyponyms);
    generated[i] = candidates.size();
    kept[i] = filter_negatives(candidates, store, config.min_argpairs);
  });
  for (std::size_t i = 0; i < kept.size(); ++i) {
    pop.candidate_count += generated[i];
    pop.negatives.insert(pop.negatives.end(), std::make_move_iterator(kept[i].begin()),
                         std::make_move_iterator(kept[i].end()));
  }
  pop.bundles = make_bundles(pop.positives, pop.negatives, config.seed, config.max_negatives);
  if (pop.bundles.empty()) {
    pop.diagnostics.push_back({"empty_population", "no positive has a surviving negative"});
  }
  log::info("synthesis_done", {{"positives", pop.positives.size()},
                               {"candidates", pop.candidate_count},
                               {"negatives", pop.negatives.size()},
                               {"bundles", pop.bundles.size()}});
  return pop;
}

std::size_t Dataset::negative_count() const {
  std::size_t n = 0;
  for (const auto& b : bundles) n += b.negatives.size();
  return n;
}

std::vector<Proposition> Dataset::propositions() const {
  std::vector<Proposition> out;
  for (const auto& b : bundles) {
    out.push_back(b.positive);
    out.insert(out.end(), b.negatives.begin(), b.negatives.end());
  }
  return out;
}

Dataset sample_dataset(std::span<const Bundle> bundles, const SamplingConfig& config,
                       const std::map<WindowId, std::size_t>& window_articles) {
  config.buckets.validate();
  if (config.bucket_slack < 0.0) throw std::invalid_argument("bucket_slack must be non-negative");
  Dataset result;
  const std::size_t nb = config.buckets.bucket_count();

  std::map<WindowId, std::vector<std::size_t>> by_window;
  for (std::size_t i = 0; i < bundles.size(); ++i) by_window[bundles[i].positive.window].push_back(i);

  std::vector<WindowId> windows;
  std::vector<double> weights;
  std::vector<std::size_t> available;
  for (const auto& [w, members] : by_window) {
    windows.push_back(w);
    auto it = window_articles.find(w);
    weights.push_back(it == window_articles.end() ? 0.0 : static_cast<double>(it->second));
    available.push_back(members.size());
  }
  if (std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) std::fill(weights.begin(), weights.end(), 1.0);
  if (bundles.size() < config.target_positive_count) {
    result.diagnostics.push_back({"population_too_small", "requested " + std::to_string(config.target_positive_count) +
                                                              " positives but only " + std::to_string(bundles.size()) +
                                                              " bundles exist"});
  }
  const auto quotas = capped_quotas(weights, available, config.target_positive_count);
  const std::size_t quota_total = std::accumulate(quotas.begin(), quotas.end(), std::size_t{0});

  std::vector<double> reference;
  if (config.reference_distribution) {
    reference = *config.reference_distribution;
    if (reference.size() != nb) throw std::invalid_argument("reference distribution has the wrong bucket count");
  } else {
    reference.assign(nb, 0.0);
    for (const auto& b : bundles) reference[config.buckets.bucket_of(b.positive.predicate_frequency)] += 1.0;
  }

  std::size_t total_negatives = 0;
  for (const auto& b : bundles) total_negatives += b.negatives.size();
  const std::size_t target_negatives =
      bundles.empty() ? 0
                      : static_cast<std::size_t>(std::llround(static_cast<double>(quota_total) *
                                                              static_cast<double>(total_negatives) /
                                                              static_cast<double>(bundles.size())));
  const auto bucket_quota = largest_remainder(reference, target_negatives);
  std::vector<std::size_t> allowance(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    allowance[b] = bucket_quota[b] +
                   static_cast<std::size_t>(std::ceil(config.bucket_slack * static_cast<double>(bucket_quota[b])));
  }

  std::vector<std::vector<std::size_t>> order(windows.size());
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    order[wi] = by_window[windows[wi]];
    SeededRng rng(derive_seed(config.seed, "window:" + std::to_string(windows[wi].value)));
    rng.shuffle(std::span(order[wi]));
  }

  struct Slot {
    double key;
    std::size_t window_index;
  };
  std::vector<Slot> slots;
  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    for (std::size_t k = 0; k < quotas[wi]; ++k) {
      slots.push_back({(static_cast<double>(k) + 0.5) / static_cast<double>(quotas[wi]), wi});
    }
  }
  std::stable_sort(slots.begin(), slots.end(), [](const Slot& a, const Slot& b) {
    return a.key != b.key ? a.key < b.key : a.window_index < b.window_index;
  });

  // A bucket may run ahead of its share of the slots processed so far by at
  // most one bundle; bundles held back by that pacing stay eligible for later
  // slots of their window, bundles over the final allowance are dropped.
  std::size_t widest = 0;
  for (const auto& b : bundles) widest = std::max(widest, b.negatives.size());
  std::vector<std::size_t> used(nb, 0);
  std::vector<std::size_t> cursor(windows.size(), 0);
  std::vector<std::vector<std::size_t>> deferred(windows.size());
  std::vector<std::size_t> shortfall(windows.size(), 0);
  std::vector<std::size_t> chosen;
  std::vector<std::size_t> need(nb);
  enum class Fit { yes, later, never };
  auto fit = [&](std::size_t candidate, double progress) {
    std::fill(need.begin(), need.end(), 0);
    for (const auto& n : bundles[candidate].negatives) ++need[config.buckets.bucket_of(n.predicate_frequency)];
    Fit result = Fit::yes;
    for (std::size_t b = 0; b < nb; ++b) {
      if (need[b] == 0) continue;
      if (used[b] + need[b] > allowance[b]) return Fit::never;
      const auto paced = static_cast<std::size_t>(std::ceil(progress * static_cast<double>(allowance[b])));
      if (used[b] + need[b] > paced + widest) result = Fit::later;
    }
    return result;
  };
  auto admit = [&](std::size_t candidate) {
    for (std::size_t b = 0; b < nb; ++b) used[b] += need[b];
    chosen.push_back(candidate);
  };
  for (std::size_t si = 0; si < slots.size(); ++si) {
    const std::size_t wi = slots[si].window_index;
    const double progress = static_cast<double>(si + 1) / static_cast<double>(slots.size());
    bool filled = false;
    auto& held = deferred[wi];
    for (std::size_t k = 0; k < held.size() && !filled;) {
      const Fit f = fit(held[k], progress);
      if (f == Fit::yes) {
        admit(held[k]);
        filled = true;
      }
      if (f == Fit::later) {
        ++k;
      } else {
        held.erase(held.begin() + static_cast<std::ptrdiff_t>(k));
      }
    }
    while (cursor[wi] < order[wi].size() && !filled) {
      const std::size_t candidate = order[wi][cursor[wi]++];
      const Fit f = fit(candidate, progress);
      if (f == Fit::yes) {
        admit(candidate);
        filled = true;
      } else if (f == Fit::later) {
        held.push_back(candidate);
      }
    }
    if (!filled) ++shortfall[wi];
  }

  for (std::size_t wi = 0; wi < windows.size(); ++wi) {
    if (shortfall[wi] == 0) continue;
    result.diagnostics.push_back({"window_shortfall", "window " + std::to_string(windows[wi].value) + " filled " +
                                                          std::to_string(quotas[wi] - shortfall[wi]) + " of " +
                                                          std::to_string(quotas[wi]) + " slots"});
  }
  std::sort(chosen.begin(), chosen.end());
  result.bundles.reserve(chosen.size());
  for (auto i : chosen) result.bundles.push_back(bundles[i]);
  for (const auto& d : result.diagnostics) log::warn(d.code, {{"message", d.message}});
  return result;
}

Dataset sample_dataset(std::span<const Bundle> bundles, const SamplingConfig& config, const CorpusStore& store) {
  std::map<WindowId, std::size_t> articles;
  for (const auto& w : store.windows()) articles[w.id] = w.article_ids.size();
  return sample_dataset(bundles, config, articles);
}

std::pair<Dataset, Dataset> split_by_time(const Dataset& dataset, Date boundary, const CorpusStore& store) {
  std::pair<Dataset, Dataset> out;
  for (const auto& b : dataset.bundles) {
    if (store.window(b.positive.window).end < boundary) {
      out.first.bundles.push_back(b);
    } else {
      out.second.bundles.push_back(b);
    }
  }
  return out;
}

void write_dataset_jsonl(std::ostream& out, const Dataset& dataset) {
  for (const auto& b : dataset.bundles) {
    out << proposition_json(b.positive).dump() << '\n';
    for (const auto& n : b.negatives) out << proposition_json(n).dump() << '\n';
  }
}

Dataset read_dataset_jsonl(std::istream& in) {
  Dataset ds;
  std::unordered_map<std::string, std::size_t> bundle_index;
  std::vector<std::pair<std::size_t, Proposition>> negatives;
  std::set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::normalize_whitespace(line).empty()) continue;
    Proposition p = parse_proposition(line, line_no);
    if (!ids.insert(p.id).second) throw InputError("duplicate proposition id " + p.id);
    if (p.label == Label::positive) {
      if (bundle_index.contains(p.bundle_id)) throw InputError("bundle " + p.bundle_id + " has two positives");
      bundle_index.emplace(p.bundle_id, ds.bundles.size());
      Bundle b;
      b.bundle_id = p.bundle_id;
      b.positive = std::move(p);
      ds.bundles.push_back(std::move(b));
    } else {
      negatives.emplace_back(line_no, std::move(p));
    }
  }
  for (auto& [line_no, n] : negatives) {
    auto it = bundle_index.find(n.bundle_id);
    if (it == bundle_index.end()) {
      throw InputError("dataset line " + std::to_string(line_no) + ": negative " + n.id + " has no positive in bundle " +
                       n.bundle_id);
    }
    auto& bundle = ds.bundles[it->second];
    if (*n.parent_positive_id != bundle.positive.id) {
      throw InputError("negative " + n.id + " names parent " + *n.parent_positive_id + " but its bundle positive is " +
                       bundle.positive.id);
    }
    if (n.window != bundle.positive.window) throw InputError("negative " + n.id + " is in a different window");
    bundle.negatives.push_back(std::move(n));
  }
  return ds;
}

void write_audit_sample(std::ostream& out, const Dataset& dataset, std::size_t per_label, TypeAssigner& types,
                        std::uint64_t seed) {
  std::vector<const Proposition*> pools[2];
  for (const auto& b : dataset.bundles) {
    pools[0].push_back(&b.positive);
    for (const auto& n : b.negatives) pools[1].push_back(&n);
  }
  auto mask = [&](const std::string& argument) {
    auto type = types.assign(argument);
    if (!type) {
      log::warn("type_assignment_failed", {{"argument", argument}});
      return std::string("entity");
    }
    return *type;
  };
  for (int which = 0; which < 2; ++which) {
    auto& pool = pools[which];
    SeededRng rng(derive_seed(seed, which == 0 ? "audit:positive" : "audit:negative"));
    const std::size_t take = std::min(per_label, pool.size());
    for (std::size_t k = 0; k < take; ++k) std::swap(pool[k], pool[k + rng.below(pool.size() - k)]);
    pool.resize(take);
    for (const Proposition* p : pool) {
      ordered_json j;
      j["id"] = p->id;
      j["label"] = label_name(p->label);
      j["masked"] = Relation{mask(p->subject), p->predicate, mask(p->object)}.text();
      j["predicate"] = text::join(p->predicate);
      j["felicitous"] = nullptr;
      out << j.dump() << '\n';
    }
  }
}

}  // namespace booqa
