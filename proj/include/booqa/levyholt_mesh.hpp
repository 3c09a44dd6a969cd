#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "booqa/entity_typing.hpp"
#include "booqa/errors.hpp"
#include "booqa/relation.hpp"

namespace booqa {

enum class Split { train, dev, test };
std::string_view split_name(Split split);
Split parse_split(std::string_view name);

enum class SubGroup { paraphrases, dir_true, dir_false, unrelated };
std::string_view subgroup_name(SubGroup group);
SubGroup parse_subgroup(std::string_view name);
// Original entailment label shared by every member of the group.
int subgroup_label(SubGroup group);

struct EntailmentPair {
  std::string id;
  Relation premise;
  Relation hypothesis;
  int label = 0;
  Split split = Split::train;
  std::optional<std::size_t> converse;  // index into the same collection
};

struct PairCollection {
  std::vector<EntailmentPair> pairs;
  std::vector<std::size_t> unpaired;  // no converse found
  Diagnostics diagnostics;
};

// "subj,pred,obj <TAB> subj,pred,obj <TAB> label". Arguments are split at the
// first and last comma, so predicates may contain commas. Labels accept
// True/False, 1/0, yes/no, y/n in any case. Malformed lines are skipped and
// reported.
std::vector<EntailmentPair> read_levyholt_tsv(std::istream& in, Split split, std::string_view source,
                                              Diagnostics* diagnostics = nullptr);

// Reads train/dev/test files (".txt" or ".tsv") from a release directory and
// links converses.
PairCollection load_levyholt_dir(const std::filesystem::path& dir);

// Pairs each entry with the entry whose premise and hypothesis are swapped,
// matching on normalized text. Each entry links to at most one converse.
void link_converses(PairCollection& collection);

// nullopt for entries without a converse.
std::vector<std::optional<SubGroup>> classify_subgroups(std::span<const EntailmentPair> pairs);

// Moves every converse pair that straddles splits into one of its two splits,
// chosen by a seeded coin per pair. Returns the number of pairs moved.
std::size_t fix_split_leakage(std::span<EntailmentPair> pairs, std::uint64_t seed);

struct SubsetEntry {
  std::size_t pair = 0;
  int label = 0;
  SubGroup group = SubGroup::paraphrases;
};

struct MeshSubset {
  SubGroup first;
  SubGroup second;
  std::string name() const;  // "<first>-<second>"
  std::vector<SubsetEntry> entries;
};

// Opposite-label groups keep their labels; for same-label groups the more
// paraphrastic one (Paraphrases > DirTrue = DirFalse > Unrelated) gets 1.
MeshSubset build_subset(SubGroup first, SubGroup second, std::span<const EntailmentPair> pairs,
                        std::span<const std::optional<SubGroup>> groups);

// All six pairings in the order Paraphrases, DirTrue, DirFalse, Unrelated.
std::vector<MeshSubset> build_mesh(std::span<const EntailmentPair> pairs,
                                   std::span<const std::optional<SubGroup>> groups);

void write_subset_jsonl(std::ostream& out, const MeshSubset& subset, std::span<const EntailmentPair> pairs);

struct PromptTemplate {
  std::string id;
  std::string text;  // with "{premise}" and "{hypothesis}" slots
};

enum class PromptDirection { forward, reversed };

struct PromptInstance {
  std::string template_id;
  std::string text;
  PromptDirection direction = PromptDirection::forward;
};

// {"templates": [{"id": ..., "text": ...}]} or one template per line.
std::vector<PromptTemplate> read_prompt_templates(std::istream& in);

std::string render_template(std::string_view text, std::string_view premise, std::string_view hypothesis);

// Forward instances for every template, followed by their reversed
// counterparts when `symmetric` is set.
std::vector<PromptInstance> render_prompts(const Relation& premise, const Relation& hypothesis,
                                           std::span<const PromptTemplate> templates, bool symmetric);

inline constexpr std::string_view kHonlyPremise = "true";
inline constexpr std::string_view kHonlyPremiseZh = "正确";

// The premise becomes the single token `premise_token`; the hypothesis is
// untouched.
EntailmentPair honly_transform(const EntailmentPair& pair, std::string_view premise_token = kHonlyPremise);

// Subject and object replaced by their entity types; arguments the assigner
// cannot type become "entity".
Relation mask_arguments(const Relation& relation, TypeAssigner& types, Diagnostics* diagnostics = nullptr);

struct SubsplitResult {
  std::vector<std::size_t> train;
  std::vector<std::size_t> dev2;
  std::vector<std::size_t> dropped;
  Diagnostics diagnostics;
};

// Seeded split of items into train/dev2 target sizes in which all items with
// the same normalized hypothesis text land on one side.
SubsplitResult subsplit_dev(std::span<const std::string> hypothesis_texts, std::size_t train_size,
                            std::size_t dev2_size, std::uint64_t seed);

// Hypotheses present on both sides are kept on one side, chosen by a seeded
// coin per hypothesis, and removed from the other. Returns the surviving
// indices of each side.
std::array<std::vector<std::size_t>, 2> dedup_across(std::span<const std::string> lhs,
                                                     std::span<const std::string> rhs, std::uint64_t seed);

}  // namespace booqa
