#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "booqa/relation.hpp"

namespace booqa {

// One premise/hypothesis pair. Structured relations are present for relation
// evidence; sentence and article evidence only carry text.
struct ScoringItem {
  std::optional<Relation> premise_relation;
  std::string premise_text;
  Relation hypothesis;
  std::string hypothesis_text;
};

struct ScorerCapabilities {
  std::size_t batch_size = 64;
  bool symmetric = false;
  bool concurrency_safe = false;
};

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string identity() const = 0;
  virtual ScorerCapabilities capabilities() const { return {}; }
  // One entry per item, in order. nullopt means the scorer abstains, which is
  // different from a score of 0. Throws ScorerError when the batch failed.
  virtual std::vector<std::optional<double>> score_batch(std::span<const ScoringItem> items) = 0;
};

class ConstantScorer : public Scorer {
 public:
  explicit ConstantScorer(double value = 0.5) : value_(value) {}
  std::string identity() const override;
  ScorerCapabilities capabilities() const override { return {1024, true, true}; }
  std::vector<std::optional<double>> score_batch(std::span<const ScoringItem> items) override {
    return std::vector<std::optional<double>>(items.size(), value_);
  }

 private:
  double value_;
};

}  // namespace booqa
