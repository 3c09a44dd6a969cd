#include "fixtures.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>
#include <unistd.h>

#include "booqa/date.hpp"
#include "booqa/rng.hpp"

namespace fixture {

using booqa::Article;
using booqa::RawTriple;
using booqa::SeededRng;

namespace {

std::vector<std::string> tokens(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

}  // namespace

Corpus news_corpus(std::uint64_t seed) {
  const std::vector<std::string> entities{"Obama", "Merkel", "Putin", "NATO", "Berlin", "Google"};
  const std::vector<std::string> predicates{
      "visit",      "tour",        "inspect",        "examine", "attack",  "raid",    "bomb",
      "shell",      "criticize",   "slam",           "lambaste", "meet with", "negotiate with", "consult",
      "consult with", "pay",       "compensate",     "praise",  "visit secretly", "haunt", "see"};
  SeededRng rng(seed);
  Corpus c;
  const auto start = *booqa::parse_iso_date("2020-01-01");
  for (int a = 0; a < 45; ++a) {
    Article article;
    article.article_id = "a" + std::to_string(a);
    article.date = start + std::chrono::days(a / 5);
    const int sentences = 2 + static_cast<int>(rng.below(2));
    for (int s = 0; s < sentences; ++s) {
      const std::string sid = "s" + std::to_string(s);
      const int count = 1 + static_cast<int>(rng.below(2));
      std::string text;
      for (int t = 0; t < count; ++t) {
        // Mostly a few frequent pairs so that windows have starring pairs.
        const std::size_t si = rng.below(rng.coin() ? 3 : entities.size());
        std::size_t oi = rng.below(entities.size() - 1);
        if (oi >= si) ++oi;
        const auto& pred = predicates[rng.below(predicates.size())];
        c.triples.push_back({article.article_id, sid, entities[si], tokens(pred), entities[oi]});
        text += (text.empty() ? "" : " ") + entities[si] + " " + pred + " " + entities[oi] + ".";
      }
      article.sentences.push_back({sid, text});
    }
    c.articles.push_back(std::move(article));
  }
  return c;
}

std::vector<booqa::Synset> news_synsets() {
  return {
      {"visit.v.01", {"visit"}, {"tour.v.01", "inspect.v.01"}},
      {"visit.v.02", {"visit", "see"}, {"haunt.v.01"}},
      {"tour.v.01", {"tour"}, {}},
      {"inspect.v.01", {"inspect", "examine"}, {}},
      {"haunt.v.01", {"haunt"}, {}},
      {"attack.v.01", {"attack", "assail"}, {"raid.v.01", "bomb.v.01"}},
      {"raid.v.01", {"raid"}, {}},
      {"bomb.v.01", {"bomb", "shell"}, {}},
      {"criticize.v.01", {"criticize", "knock"}, {"lambaste.v.01"}},
      {"lambaste.v.01", {"lambaste", "slam"}, {}},
      {"meet_with.v.01", {"meet with", "sit down with"}, {"negotiate_with.v.01"}},
      {"negotiate_with.v.01", {"negotiate with"}, {}},
      {"meet.v.01", {"meet", "encounter"}, {"consult.v.01"}},
      {"consult.v.01", {"consult"}, {}},
      {"pay.v.01", {"pay"}, {"compensate.v.01"}},
      {"compensate.v.01", {"compensate", "recompense"}, {}},
  };
}

Corpus tiny_corpus() {
  Corpus c;
  const auto d1 = *booqa::parse_iso_date("2021-03-01");
  const auto d2 = *booqa::parse_iso_date("2021-03-05");
  c.articles.push_back({"n1", d1,
                        {{"1", "Obama visited Berlin on Monday."},
                         {"2", "Obama toured Berlin with Merkel."},
                         {"3", "Markets were calm."}}});
  c.articles.push_back({"n2", d1,
                        {{"1", "Obama praised Berlin in a speech."}, {"2", "Merkel met with Obama in Berlin."}}});
  c.articles.push_back({"n3", d2, {{"1", "Putin attacked NATO in an interview."}, {"2", "NATO criticized Putin."}}});
  c.triples = {
      {"n1", "1", "Obama", {"visit"}, "Berlin"},   {"n1", "2", "Obama", {"tour"}, "Berlin"},
      {"n2", "1", "Obama", {"praise"}, "Berlin"},  {"n2", "2", "Merkel", {"meet", "with"}, "Obama"},
      {"n3", "1", "Putin", {"attack"}, "NATO"},    {"n3", "2", "NATO", {"criticize"}, "Putin"},
  };
  return c;
}

Population synthetic_population(std::size_t bundles, std::size_t windows, std::uint64_t seed, double skew) {
  SeededRng rng(seed);
  Population pop;
  for (std::size_t w = 0; w < windows; ++w) pop.window_articles[booqa::WindowId{static_cast<std::uint32_t>(w)}] = 10 + rng.below(90);
  auto log_uniform = [&](double lo, double hi) {
    return static_cast<std::size_t>(std::exp(std::log(lo) + rng.unit() * (std::log(hi) - std::log(lo))));
  };
  for (std::size_t i = 0; i < bundles; ++i) {
    const booqa::WindowId w{static_cast<std::uint32_t>(rng.below(windows))};
    const std::string tail = std::to_string(w.value) + "-" + std::to_string(i);
    booqa::Bundle b;
    b.bundle_id = "B-" + tail;
    b.positive.id = "P-" + tail;
    b.positive.bundle_id = b.bundle_id;
    b.positive.subject = "s" + std::to_string(i);
    b.positive.object = "o" + std::to_string(i);
    b.positive.predicate = {"p" + std::to_string(i % 97)};
    b.positive.window = w;
    b.positive.predicate_frequency = log_uniform(30, 200000);
    const std::size_t negs = 1 + rng.below(2) + (rng.unit() < 0.7 ? 1 : 0);
    for (std::size_t k = 0; k < std::min<std::size_t>(negs, 2); ++k) {
      booqa::Proposition n = b.positive;
      n.id = "N-" + tail + "-" + std::to_string(k);
      n.label = booqa::Label::negative;
      n.parent_positive_id = b.positive.id;
      n.predicate = {"q" + std::to_string((i + k) % 89)};
      n.predicate_frequency = rng.unit() < 0.4 ? log_uniform(3000, 200000) : log_uniform(30, 200000);
      b.negatives.push_back(std::move(n));
    }
    pop.bundles.push_back(std::move(b));
  }
  return pop;
}

std::vector<MeshCase> mesh_cases() {
  using G = booqa::SubGroup;
  return {
      {"person,shop in,location", "person,go to,location", 1, 0, G::dir_true},
      {"person,go to,location", "person,shop in,location", 0, 1, G::dir_false},
      {"person,arrive at,location", "person,get to,location", 1, 1, G::paraphrases},
      {"person,get to,location", "person,arrive at,location", 1, 1, G::paraphrases},
      {"person,shop in,location", "person,fall ill in,location", 0, 0, G::unrelated},
      {"person,fall ill in,location", "person,shop in,location", 0, 0, G::unrelated},
      {"team,beat,team", "team,play,team", 1, 0, G::dir_true},
      {"team,play,team", "team,beat,team", 0, 1, G::dir_false},
      {"company,buy,company", "company,own,company", 1, 0, G::dir_true},
      {"company,own,company", "company,buy,company", 0, 1, G::dir_false},
      {"drug,treat,disease", "drug,cure,disease", 1, 1, G::paraphrases},
      {"drug,cure,disease", "drug,treat,disease", 1, 1, G::paraphrases},
      {"person,write,book", "person,sell,book", 0, 0, G::unrelated},
      {"person,sell,book", "person,write,book", 0, 0, G::unrelated},
      {"city,lie in,country", "city,be located in,country", 1, 1, G::paraphrases},
      {"city,be located in,country", "city,lie in,country", 1, 1, G::paraphrases},
  };
}

std::string mesh_tsv(const std::vector<MeshCase>& cases, bool with_orphan) {
  std::string out;
  for (const auto& c : cases) out += c.premise + "\t" + c.hypothesis + "\t" + (c.forward ? "True" : "False") + "\n";
  if (with_orphan) out += "person,eat,food\tperson,digest,food\tTrue\n";
  return out;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("booqa-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream(path, std::ios::binary) << content;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string articles_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& a : corpus.articles) {
    nlohmann::json sentences = nlohmann::json::array();
    for (const auto& s : a.sentences) sentences.push_back({{"sentence_id", s.sentence_id}, {"text", s.text}});
    out += nlohmann::json{{"article_id", a.article_id}, {"date", booqa::format_date(a.date)}, {"sentences", sentences}}
               .dump() +
           "\n";
  }
  return out;
}

std::string triples_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& t : corpus.triples) {
    out += nlohmann::json{{"article_id", t.article_id},
                          {"sentence_id", t.sentence_id},
                          {"subject", t.subject},
                          {"predicate", t.predicate},
                          {"object", t.object}}
               .dump() +
           "\n";
  }
  return out;
}

std::string synsets_json(const std::vector<booqa::Synset>& synsets) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& s : synsets) arr.push_back({{"id", s.id}, {"lemmas", s.lemmas}, {"hyponyms", s.hyponym_ids}});
  return nlohmann::json{{"synsets", arr}}.dump(1) + "\n";
}

}  // namespace fixture
