#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "booqa/bench_synthesis.hpp"
#include "booqa/corpus_store.hpp"
#include "booqa/levyholt_mesh.hpp"
#include "booqa/lexicon.hpp"

namespace fixture {

struct Corpus {
  std::vector<booqa::Article> articles;
  std::vector<booqa::RawTriple> triples;
};

// 45 articles over nine days with a few hundred triples between six
// entities, drawn from a fixed seed.
Corpus news_corpus(std::uint64_t seed = 7);

// Small verb hierarchy covering the news corpus predicates, including a
// polysemous lemma and multiword entries.
std::vector<booqa::Synset> news_synsets();

// Two windows and a handful of hand-written triples, for retrieval tests.
Corpus tiny_corpus();

struct Population {
  std::vector<booqa::Bundle> bundles;
  std::map<booqa::WindowId, std::size_t> window_articles;
};

// Bundles with log-uniform positive frequencies spread over `windows`
// windows. A `skew` share of negatives is drawn from the upper frequencies
// only, the rest log-uniformly like the positives.
Population synthetic_population(std::size_t bundles, std::size_t windows, std::uint64_t seed, double skew = 0.3);

struct MeshCase {
  std::string premise;
  std::string hypothesis;
  int forward;
  int backward;
  booqa::SubGroup expected;
};

// Converse-complete entries with hand-assigned sub-groups.
std::vector<MeshCase> mesh_cases();
// Both directions of every case plus one entry without a converse, as a
// LevyHolt-style TSV for the given split.
std::string mesh_tsv(const std::vector<MeshCase>& cases, bool with_orphan);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// Articles/triples JSONL in the ingest input format.
std::string articles_jsonl(const Corpus& corpus);
std::string triples_jsonl(const Corpus& corpus);
std::string synsets_json(const std::vector<booqa::Synset>& synsets);

}  // namespace fixture
