#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "booqa/entity_typing.hpp"
#include "booqa/errors.hpp"
#include "booqa/scorer.hpp"
#include "booqa/text.hpp"

namespace booqa {

// A binary predicate node such as "(go.1,go.to.2)#person#location": two role
// slots, each a dotted lemma path ending in the argument position, followed
// by the argument types.
struct TypedPredicate {
  std::string first_role;
  std::string second_role;
  std::string first_type;
  std::string second_type;

  static std::optional<TypedPredicate> parse(std::string_view node);
  // Canonical node for a plain predicate: "(w1.1,w1.w2...wn.2)#t1#t2".
  static TypedPredicate from_tokens(std::span<const std::string> predicate_tokens, std::string_view first_type,
                                    std::string_view second_type);

  std::string node() const;
  // Role tokens merged without slot numbers: "(go.1,go.to.2)" -> "go to".
  std::string surface() const;
  // Order-free key of the subgraph the node lives in: "location#person".
  std::string type_pair() const;
};

// Strips the "_1"/"_2" disambiguation suffix graphs use for same-type pairs.
std::string base_type(std::string_view type);
std::string type_pair_key(std::string_view a, std::string_view b);

enum class GraphFileFormat { tsv, sims };

struct SubgraphSource {
  std::string type_pair;
  std::filesystem::path file;
  GraphFileFormat format = GraphFileFormat::tsv;
};

struct SubgraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t malformed_lines = 0;
  std::size_t duplicate_edges = 0;
  std::size_t approx_bytes = 0;
};

struct GraphStats {
  std::size_t subgraphs = 0;
  std::size_t loaded_subgraphs = 0;
  SubgraphStats totals;
};

// Directed, typed entailment graph partitioned by argument-type pair.
// Subgraphs are parsed on first access; lookups are safe from any number of
// threads.
class EntailmentGraph {
 public:
  // A directory holding either manifest.json
  //   {"provenance": "...", "subgraphs": [{"types": "a#b", "file": "...", "format": "tsv"|"sims"}]}
  // or files named "<a>#<b>.tsv" (native) and "<a>#<b>_sims.txt".
  static std::shared_ptr<EntailmentGraph> open_dir(const std::filesystem::path& dir);
  static std::shared_ptr<EntailmentGraph> from_sources(std::vector<SubgraphSource> sources,
                                                       std::string provenance = "custom");
  // In-memory native edge list, one "pred\tpred\tscore" per line, split
  // into subgraphs by the node types.
  static std::shared_ptr<EntailmentGraph> from_tsv(std::istream& in, std::string provenance = "custom");

  // Only consulted for "sims" files: which similarity block to read. Empty
  // picks the first block under each predicate.
  void set_sims_section(std::string name) { sims_section_ = std::move(name); }

  const std::string& provenance() const { return provenance_; }
  std::vector<std::string> type_pairs() const;

  void load_all(unsigned jobs = 1) const;
  GraphStats stats() const;
  Diagnostics diagnostics() const;

  // Edge premise -> hypothesis with exact typed-node equality.
  std::optional<double> exact(const TypedPredicate& premise, const TypedPredicate& hypothesis) const;

  // Maximum over all edges between nodes whose lemmatized surface matches,
  // whatever their role slots. With cross_type, every subgraph is searched.
  std::optional<double> fuzzy(std::span<const std::string> premise_tokens,
                              std::span<const std::string> hypothesis_tokens, std::string_view type_pair,
                              bool cross_type = false) const;

 private:
  struct Subgraph;
  struct Slot;

  EntailmentGraph() = default;
  const Subgraph* subgraph(std::string_view type_pair) const;
  const Subgraph& ensure_loaded(Slot& slot) const;
  static std::optional<double> fuzzy_in(const Subgraph& g, std::span<const std::string> premise_tokens,
                                        std::span<const std::string> hypothesis_tokens);

  std::string provenance_ = "custom";
  std::string sims_section_;
  std::map<std::string, std::unique_ptr<Slot>, std::less<>> slots_;
  // Lines of an in-memory edge list that could not be assigned a subgraph.
  std::size_t unrouted_malformed_ = 0;
  Diagnostics unrouted_diagnostics_;
};

struct EgScorerOptions {
  bool fuzzy = false;
  bool cross_type = false;
};

class EgScorer : public Scorer {
 public:
  EgScorer(std::shared_ptr<const EntailmentGraph> graph, EgScorerOptions options = {},
           std::shared_ptr<TypeAssigner> types = nullptr);

  std::string identity() const override;
  ScorerCapabilities capabilities() const override;
  // Items without a structured premise relation, or with no matching edge,
  // are abstentions.
  std::vector<std::optional<double>> score_batch(std::span<const ScoringItem> items) override;

  std::optional<double> lookup(const Relation& premise, const Relation& hypothesis);

 private:
  std::string type_of(const std::string& argument);

  std::shared_ptr<const EntailmentGraph> graph_;
  EgScorerOptions options_;
  std::shared_ptr<TypeAssigner> types_;
  std::mutex type_mutex_;
  std::unordered_map<std::string, std::string> type_cache_;
};

}  // namespace booqa
