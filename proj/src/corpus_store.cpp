#include "booqa/corpus_store.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <tuple>

#include <json.hpp>

#include "booqa/text.hpp"

namespace booqa {

using nlohmann::json;

namespace {

constexpr const char* kIndexFormat = "booqa-corpus-index";

std::optional<std::string> id_field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) return std::nullopt;
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  return std::nullopt;
}

void reject(IngestReport& report, std::size_t& counter, std::string code, std::string message) {
  ++counter;
  report.diagnostics.push_back({std::move(code), std::move(message)});
}

std::vector<std::string> normalize_predicate(std::span<const std::string> tokens) {
  std::vector<std::string> out;
  for (const auto& t : tokens) {
    for (auto& piece : text::split_whitespace(t)) out.push_back(text::fold_case(piece));
  }
  return out;
}

std::vector<Article> parse_articles(std::istream& in, IngestReport& report) {
  std::vector<Article> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::normalize_whitespace(line).empty()) continue;
    const std::string where = "articles line " + std::to_string(line_no);
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      reject(report, report.articles_rejected, "malformed_json", where);
      continue;
    }
    auto id = id_field(obj, "article_id");
    if (!id || id->empty()) {
      reject(report, report.articles_rejected, "missing_article_id", where);
      continue;
    }
    auto date_it = obj.find("date");
    std::optional<Date> date;
    if (date_it != obj.end() && date_it->is_string()) date = parse_iso_date(date_it->get<std::string>());
    if (!date) {
      reject(report, report.articles_rejected, "unparseable_date", where + " article " + *id);
      continue;
    }
    Article article{*id, *date, {}};
    bool ok = true;
    if (auto s = obj.find("sentences"); s != obj.end()) {
      if (!s->is_array()) ok = false;
      for (const auto& sent : ok ? *s : json::array()) {
        auto sid = sent.is_object() ? id_field(sent, "sentence_id") : std::nullopt;
        if (!sid) {
          ok = false;
          break;
        }
        std::string body;
        if (auto t = sent.find("text"); t != sent.end() && t->is_string()) body = t->get<std::string>();
        article.sentences.push_back({*sid, std::move(body)});
      }
    }
    if (!ok) {
      reject(report, report.articles_rejected, "malformed_sentences", where + " article " + *id);
      continue;
    }
    out.push_back(std::move(article));
  }
  return out;
}

std::vector<RawTriple> parse_triples(std::istream& in, IngestReport& report) {
  std::vector<RawTriple> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::normalize_whitespace(line).empty()) continue;
    const std::string where = "triples line " + std::to_string(line_no);
    json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded() || !obj.is_object()) {
      reject(report, report.triples_rejected, "malformed_json", where);
      continue;
    }
    RawTriple t;
    auto aid = id_field(obj, "article_id");
    auto sid = id_field(obj, "sentence_id");
    auto subj = obj.find("subject");
    auto objt = obj.find("object");
    auto pred = obj.find("predicate");
    if (!aid || !sid || subj == obj.end() || !subj->is_string() || objt == obj.end() ||
        !objt->is_string() || pred == obj.end()) {
      reject(report, report.triples_rejected, "missing_field", where);
      continue;
    }
    t.article_id = *aid;
    t.sentence_id = *sid;
    t.subject = subj->get<std::string>();
    t.object = objt->get<std::string>();
    if (pred->is_string()) {
      t.predicate = text::split_whitespace(pred->get<std::string>());
    } else if (pred->is_array()) {
      bool strings = std::all_of(pred->begin(), pred->end(), [](const json& j) { return j.is_string(); });
      if (!strings) {
        reject(report, report.triples_rejected, "malformed_predicate", where);
        continue;
      }
      for (const auto& tok : *pred) t.predicate.push_back(tok.get<std::string>());
    }
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

std::string predicate_key(std::span<const std::string> tokens) {
  return text::join(normalize_predicate(tokens));
}

ArgPair ArgPair::unordered() const {
  if (object < subject) return {object, subject};
  return *this;
}

ArgPair ArgPair::normalized(std::string_view subject, std::string_view object) {
  return {text::normalize(subject), text::normalize(object)};
}

std::string RelationTriple::predicate_key() const { return text::join(predicate); }

CorpusStore CorpusStore::ingest(std::istream& articles_jsonl, std::istream& triples_jsonl,
                                const IngestOptions& options, IngestReport* report) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;
  auto articles = parse_articles(articles_jsonl, rep);
  auto triples = parse_triples(triples_jsonl, rep);
  CorpusStore store;
  store.build(std::move(articles), std::move(triples), options, rep);
  return store;
}

CorpusStore CorpusStore::from_records(std::vector<Article> articles, std::vector<RawTriple> triples,
                                      const IngestOptions& options, IngestReport* report) {
  IngestReport local;
  CorpusStore store;
  store.build(std::move(articles), std::move(triples), options, report ? *report : local);
  return store;
}

void CorpusStore::build(std::vector<Article> articles, std::vector<RawTriple> triples,
                        const IngestOptions& options, IngestReport& report) {
  if (options.window_span_days < 1) throw std::invalid_argument("window span must be >= 1 day");
  span_days_ = options.window_span_days;

  // Articles: duplicates are fatal, malformed sentence lists are rejected.
  std::unordered_set<std::string> seen;
  for (auto& a : articles) {
    if (!seen.insert(a.article_id).second) {
      throw InputError("duplicate article_id: " + a.article_id);
    }
    if (options.excluded_articles.contains(a.article_id)) {
      ++report.articles_excluded;
      continue;
    }
    std::unordered_map<std::string, std::uint32_t> ordinals;
    bool unique = true;
    for (std::uint32_t i = 0; i < a.sentences.size(); ++i) {
      unique = unique && ordinals.emplace(a.sentences[i].sentence_id, i).second;
    }
    if (!unique) {
      reject(report, report.articles_rejected, "duplicate_sentence_id", "article " + a.article_id);
      continue;
    }
    sentence_ordinals_.emplace(a.article_id, std::move(ordinals));
    articles_.push_back(std::move(a));
  }
  std::sort(articles_.begin(), articles_.end(),
            [](const Article& l, const Article& r) { return l.article_id < r.article_id; });
  for (std::size_t i = 0; i < articles_.size(); ++i) article_index_.emplace(articles_[i].article_id, i);
  report.articles_accepted = articles_.size();

  // Windows tile [earliest, latest] starting at the earliest date.
  if (!articles_.empty()) {
    Date lo = articles_.front().date, hi = lo;
    for (const auto& a : articles_) {
      lo = std::min(lo, a.date);
      hi = std::max(hi, a.date);
    }
    epoch_ = lo;
    const auto count = static_cast<std::uint32_t>(days_between(lo, hi) / span_days_ + 1);
    windows_.resize(count);
    for (std::uint32_t w = 0; w < count; ++w) {
      windows_[w].id = WindowId{w};
      windows_[w].start = lo + std::chrono::days{static_cast<long>(w) * span_days_};
      windows_[w].end = windows_[w].start + std::chrono::days{span_days_ - 1};
    }
    for (const auto& a : articles_) {
      windows_[static_cast<std::size_t>(days_between(lo, a.date) / span_days_)].article_ids.push_back(a.article_id);
    }
  }
  window_indexes_.resize(windows_.size());

  // Triples.
  using DedupKey = std::tuple<std::string, std::string, std::string, std::string, std::string>;
  std::set<DedupKey> dedup;
  for (auto& raw : triples) {
    if (options.excluded_articles.contains(raw.article_id)) {
      ++report.triples_excluded;
      continue;
    }
    const std::string where = "triple " + raw.article_id + "/" + raw.sentence_id;
    auto art = article_index_.find(raw.article_id);
    if (art == article_index_.end()) {
      reject(report, report.triples_rejected, "dangling_article", where);
      continue;
    }
    const auto& ordinals = sentence_ordinals_.at(raw.article_id);
    auto ord = ordinals.find(raw.sentence_id);
    if (ord == ordinals.end()) {
      reject(report, report.triples_rejected, "dangling_sentence", where);
      continue;
    }
    RelationTriple t;
    t.subject = text::normalize(raw.subject);
    t.object = text::normalize(raw.object);
    t.predicate = normalize_predicate(raw.predicate);
    if (t.predicate.empty() || t.subject.empty() || t.object.empty()) {
      reject(report, report.triples_rejected, "empty_field", where);
      continue;
    }
    t.article_id = raw.article_id;
    t.sentence_id = raw.sentence_id;
    t.sentence_ordinal = ord->second;
    const auto& article = articles_[art->second];
    t.window = WindowId{static_cast<std::uint32_t>(days_between(*epoch_, article.date) / span_days_)};
    if (!dedup.emplace(t.subject, t.predicate_key(), t.object, t.article_id, t.sentence_id).second) {
      ++report.triples_duplicate;
      continue;
    }
    triples_.push_back(std::move(t));
  }
  std::sort(triples_.begin(), triples_.end(), [](const RelationTriple& l, const RelationTriple& r) {
    return std::forward_as_tuple(l.window, l.subject, l.object, l.article_id, l.sentence_ordinal, l.predicate) <
           std::forward_as_tuple(r.window, r.subject, r.object, r.article_id, r.sentence_ordinal, r.predicate);
  });
  report.triples_accepted = triples_.size();

  std::unordered_map<std::string, std::set<ArgPair>> pairs_by_predicate;
  std::vector<std::unordered_map<std::string, std::set<std::string>>> articles_by_predicate(windows_.size());
  for (std::uint32_t i = 0; i < triples_.size(); ++i) {
    const auto& t = triples_[i];
    const std::string key = t.predicate_key();
    auto& wi = window_indexes_[t.window.value];
    wi.by_pair[t.pair()].push_back(i);
    wi.predicates_by_pair[t.pair()].insert(key);
    ++wi.predicate_stats[key].raw_mentions;
    articles_by_predicate[t.window.value][key].insert(t.article_id);
    pairs_by_predicate[key].insert(t.pair().unordered());
    ++predicate_totals_[key].mentions;
  }
  for (std::size_t w = 0; w < windows_.size(); ++w) {
    for (auto& [key, arts] : articles_by_predicate[w]) {
      window_indexes_[w].predicate_stats[key].distinct_articles = arts.size();
    }
  }
  for (auto& [key, pairs] : pairs_by_predicate) predicate_totals_[key].distinct_pairs = pairs.size();
}

void CorpusStore::check_window(WindowId id) const {
  if (!has_window(id)) throw LookupError("unknown window " + std::to_string(id.value));
}

const ContextWindow& CorpusStore::window(WindowId id) const {
  check_window(id);
  return windows_[id.value];
}

std::optional<WindowId> CorpusStore::window_of(Date date) const {
  if (!epoch_ || date < *epoch_) return std::nullopt;
  const auto w = static_cast<std::uint32_t>(days_between(*epoch_, date) / span_days_);
  if (w >= windows_.size()) return std::nullopt;
  return WindowId{w};
}

const Article* CorpusStore::find_article(std::string_view article_id) const {
  auto it = article_index_.find(std::string(article_id));
  return it == article_index_.end() ? nullptr : &articles_[it->second];
}

const Sentence* CorpusStore::find_sentence(const SentenceRef& ref) const {
  const Article* a = find_article(ref.article_id);
  if (!a) return nullptr;
  const auto& ordinals = sentence_ordinals_.at(ref.article_id);
  auto it = ordinals.find(ref.sentence_id);
  return it == ordinals.end() ? nullptr : &a->sentences[it->second];
}

const std::map<ArgPair, std::vector<std::uint32_t>>& CorpusStore::argpair_index(WindowId id) const {
  check_window(id);
  return window_indexes_[id.value].by_pair;
}

std::vector<RelationTriple> CorpusStore::evidence_for(const ArgPair& pair, WindowId id,
                                                      const std::set<SentenceRef>& excluded,
                                                      std::size_t cap) const {
  check_window(id);
  std::vector<RelationTriple> out;
  const auto& index = window_indexes_[id.value].by_pair;
  auto it = index.find(pair);
  if (it == index.end()) return out;
  for (std::uint32_t i : it->second) {
    if (out.size() >= cap) break;
    const auto& t = triples_[i];
    if (excluded.contains(t.origin())) continue;
    out.push_back(t);
  }
  return out;
}

std::size_t CorpusStore::predicate_argpair_count(std::string_view predicate_key) const {
  auto it = predicate_totals_.find(std::string(predicate_key));
  return it == predicate_totals_.end() ? 0 : it->second.distinct_pairs;
}

std::size_t CorpusStore::predicate_mentions(std::string_view predicate_key) const {
  auto it = predicate_totals_.find(std::string(predicate_key));
  return it == predicate_totals_.end() ? 0 : it->second.mentions;
}

WindowPredicateStats CorpusStore::predicate_window_stats(std::string_view predicate_key, WindowId id) const {
  check_window(id);
  const auto& stats = window_indexes_[id.value].predicate_stats;
  auto it = stats.find(std::string(predicate_key));
  return it == stats.end() ? WindowPredicateStats{} : it->second;
}

std::vector<std::string> CorpusStore::predicate_keys() const {
  std::vector<std::string> out;
  out.reserve(predicate_totals_.size());
  for (const auto& [k, _] : predicate_totals_) out.push_back(k);
  std::sort(out.begin(), out.end());
  return out;
}

bool CorpusStore::window_presence(std::span<const std::string> predicate_keys, const ArgPair& pair,
                                  WindowId id) const {
  check_window(id);
  const auto& by_pair = window_indexes_[id.value].predicates_by_pair;
  auto it = by_pair.find(pair);
  if (it == by_pair.end()) return false;
  return std::any_of(predicate_keys.begin(), predicate_keys.end(),
                     [&](const std::string& k) { return it->second.contains(k); });
}

void CorpusStore::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "articles.jsonl", std::ios::binary);
    for (const auto& a : articles_) {
      json sentences = json::array();
      for (const auto& s : a.sentences) sentences.push_back({{"sentence_id", s.sentence_id}, {"text", s.text}});
      out << json{{"article_id", a.article_id}, {"date", format_date(a.date)}, {"sentences", sentences}}.dump()
          << '\n';
    }
  }
  {
    std::ofstream out(dir / "triples.jsonl", std::ios::binary);
    for (const auto& t : triples_) {
      out << json{{"article_id", t.article_id},
                  {"sentence_id", t.sentence_id},
                  {"subject", t.subject},
                  {"predicate", t.predicate},
                  {"object", t.object},
                  {"window_id", t.window.value}}
                 .dump()
          << '\n';
    }
  }
  json manifest{{"format", kIndexFormat},
                {"version", kIndexFormatVersion},
                {"window_span_days", span_days_},
                {"epoch", epoch_ ? json(format_date(*epoch_)) : json(nullptr)},
                {"window_count", windows_.size()},
                {"article_count", articles_.size()},
                {"triple_count", triples_.size()},
                {"files", {{"articles", "articles.jsonl"}, {"triples", "triples.jsonl"}}}};
  std::ofstream(dir / "manifest.json", std::ios::binary) << manifest.dump(2) << '\n';
}

CorpusStore CorpusStore::load(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw InputError("missing index manifest in " + dir.string());
  json manifest = json::parse(mf, nullptr, false);
  if (manifest.is_discarded() || manifest.value("format", "") != kIndexFormat) {
    throw InputError("not a corpus index: " + dir.string());
  }
  if (manifest.value("version", 0) != kIndexFormatVersion) {
    throw InputError("unsupported corpus index version " + manifest["version"].dump());
  }
  IngestOptions options;
  options.window_span_days = manifest.at("window_span_days").get<int>();
  std::ifstream articles(dir / manifest["files"]["articles"].get<std::string>());
  std::ifstream triples(dir / manifest["files"]["triples"].get<std::string>());
  if (!articles || !triples) throw InputError("corpus index files missing in " + dir.string());
  IngestReport report;
  CorpusStore store = ingest(articles, triples, options, &report);
  if (store.articles_.size() != manifest.at("article_count").get<std::size_t>() ||
      store.triples_.size() != manifest.at("triple_count").get<std::size_t>() ||
      store.windows_.size() != manifest.at("window_count").get<std::size_t>()) {
    throw InputError("corpus index does not match its manifest: " + dir.string());
  }
  return store;
}

}  // namespace booqa
