#include "booqa/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "booqa/text.hpp"

namespace booqa {

TfidfIndex::TfidfIndex(const std::vector<std::string>& documents) {
  std::vector<std::unordered_map<std::string, std::size_t>> counts(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (auto& term : text::word_terms(documents[d])) ++counts[d][std::move(term)];
    for (const auto& [term, n] : counts[d]) ++df_[term];
  }
  vectors_.resize(documents.size());
  norms_.resize(documents.size());
  for (std::size_t d = 0; d < documents.size(); ++d) {
    for (const auto& [term, n] : counts[d]) {
      vectors_[d][term] = (1.0 + std::log(static_cast<double>(n))) * idf(term);
    }
    norms_[d] = norm(vectors_[d]);
  }
}

double TfidfIndex::idf(std::string_view term) const {
  auto it = df_.find(std::string(term));
  const double df = it == df_.end() ? 0.0 : static_cast<double>(it->second);
  return std::log((1.0 + static_cast<double>(norms_.size())) / (1.0 + df)) + 1.0;
}

TfidfIndex::Vector TfidfIndex::weigh(std::string_view text) const {
  std::unordered_map<std::string, std::size_t> counts;
  for (auto& term : text::word_terms(text)) ++counts[std::move(term)];
  Vector v;
  for (const auto& [term, n] : counts) v[term] = (1.0 + std::log(static_cast<double>(n))) * idf(term);
  return v;
}

double TfidfIndex::norm(const Vector& v) {
  // Summed in sorted key order so the result does not depend on hash layout.
  std::vector<std::pair<std::string_view, double>> items(v.begin(), v.end());
  std::sort(items.begin(), items.end());
  double s = 0.0;
  for (const auto& [term, w] : items) s += w * w;
  return std::sqrt(s);
}

namespace {

double dot(const std::unordered_map<std::string, double>& a, const std::unordered_map<std::string, double>& b) {
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& large = a.size() <= b.size() ? b : a;
  std::vector<std::pair<std::string_view, double>> terms;
  for (const auto& [term, w] : small) {
    auto it = large.find(term);
    if (it != large.end()) terms.emplace_back(term, w * it->second);
  }
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (const auto& [term, p] : terms) s += p;
  return s;
}

}  // namespace

double TfidfIndex::similarity(std::string_view query, std::string_view document_text) const {
  const auto q = weigh(query);
  const auto d = weigh(document_text);
  const double denom = norm(q) * norm(d);
  return denom > 0.0 ? dot(q, d) / denom : 0.0;
}

std::vector<double> TfidfIndex::similarities(std::string_view query) const {
  const auto q = weigh(query);
  const double qn = norm(q);
  std::vector<double> out(vectors_.size(), 0.0);
  for (std::size_t d = 0; d < vectors_.size(); ++d) {
    const double denom = qn * norms_[d];
    if (denom > 0.0) out[d] = dot(q, vectors_[d]) / denom;
  }
  return out;
}

std::vector<RankedDocument> TfidfIndex::top_k(std::string_view query, std::size_t k) const {
  const auto sims = similarities(query);
  std::vector<RankedDocument> ranked(sims.size());
  for (std::size_t d = 0; d < sims.size(); ++d) ranked[d] = {d, sims[d]};
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const RankedDocument& a, const RankedDocument& b) { return a.similarity > b.similarity; });
  if (ranked.size() > k) ranked.resize(k);
  return ranked;
}

}  // namespace booqa
