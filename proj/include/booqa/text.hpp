#pragma once

#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace booqa::text {

// ASCII case folding; bytes outside ASCII (UTF-8 continuation etc.) pass through.
std::string fold_case(std::string_view s);

// Trims and collapses runs of whitespace to a single space.
std::string normalize_whitespace(std::string_view s);

// Case-fold + whitespace normalization. Used for argument and predicate keys.
std::string normalize(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

std::string join(std::span<const std::string> parts, std::string_view sep = " ");

// Lower-cased alphanumeric runs; non-ASCII bytes count as word characters so
// pre-tokenized CJK text survives.
std::vector<std::string> word_terms(std::string_view s);

// Vocabulary-guided base-form reduction. A token already in the vocabulary is
// kept; otherwise an irregular-form table and then WordNet-style detachment
// suffix rules are tried and the first candidate present in the vocabulary
// wins. Without a hit the case-folded token is returned unchanged.
class Lemmatizer {
 public:
  Lemmatizer() = default;
  explicit Lemmatizer(std::unordered_set<std::string> vocabulary);

  std::string lemma(std::string_view token) const;
  std::vector<std::string> lemmas(std::span<const std::string> tokens) const;
  std::string lemma_key(std::span<const std::string> tokens) const;

  bool known(std::string_view token) const;
  const std::unordered_set<std::string>& vocabulary() const { return vocabulary_; }

 private:
  std::unordered_set<std::string> vocabulary_;
};

}  // namespace booqa::text
