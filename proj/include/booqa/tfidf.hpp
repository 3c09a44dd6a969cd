#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace booqa {

struct RankedDocument {
  std::size_t doc = 0;
  double similarity = 0.0;
};

// Small in-memory TF-IDF index over one window's articles. Term weights are
// (1 + ln tf) * idf with idf = ln((1 + N) / (1 + df)) + 1; documents are
// compared to the query by cosine similarity.
class TfidfIndex {
 public:
  explicit TfidfIndex(const std::vector<std::string>& documents);

  std::size_t size() const { return norms_.size(); }
  double idf(std::string_view term) const;

  // Cosine similarity of the query against one document whose text may differ
  // from the indexed text (e.g. with some sentences removed); idf stays that
  // of the indexed collection.
  double similarity(std::string_view query, std::string_view document_text) const;

  // Cosine similarity of the query against every indexed document.
  std::vector<double> similarities(std::string_view query) const;

  // Top k by similarity, ties broken by lower document index. Documents with
  // zero similarity are included only when fewer than k score above zero.
  std::vector<RankedDocument> top_k(std::string_view query, std::size_t k) const;

 private:
  using Vector = std::unordered_map<std::string, double>;
  Vector weigh(std::string_view text) const;
  static double norm(const Vector& v);

  std::unordered_map<std::string, std::size_t> df_;
  std::vector<Vector> vectors_;
  std::vector<double> norms_;
};

}  // namespace booqa
