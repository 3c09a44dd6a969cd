#include "booqa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

namespace booqa {

LeftBoundary parse_left_boundary(std::string_view name) {
  if (name == "inclusive") return LeftBoundary::inclusive;
  if (name == "first_threshold") return LeftBoundary::first_threshold;
  throw std::invalid_argument("unknown curve boundary: " + std::string(name));
}

std::string_view left_boundary_name(LeftBoundary boundary) {
  return boundary == LeftBoundary::inclusive ? "inclusive" : "first_threshold";
}

std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const bool> labels, LeftBoundary boundary) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  const auto positives = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true));
  if (positives == 0) throw std::invalid_argument("precision-recall curve needs at least one positive");
  for (double s : scores) {
    if (std::isnan(s)) throw std::invalid_argument("NaN score");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::vector<PrPoint> curve;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      tp += labels[order[i]] ? 1 : 0;
      ++seen;
      ++i;
    }
    curve.push_back({static_cast<double>(tp) / static_cast<double>(positives),
                     static_cast<double>(tp) / static_cast<double>(seen)});
  }
  if (boundary == LeftBoundary::inclusive) curve.insert(curve.begin(), PrPoint{0.0, curve.front().precision});
  return curve;
}

namespace {

// Integral of max(p(r) - floor, 0) over one linear segment.
double positive_part(const PrPoint& a, const PrPoint& b, double floor) {
  const double w = b.recall - a.recall;
  if (w <= 0.0) return 0.0;
  const double da = a.precision - floor, db = b.precision - floor;
  if (da >= 0.0 && db >= 0.0) return w * (da + db) / 2.0;
  if (da <= 0.0 && db <= 0.0) return 0.0;
  const double hi = std::max(da, db);
  return w * hi * hi / (2.0 * (hi - std::min(da, db)));
}

// Integral of p(r) over the part of one linear segment where p >= floor.
double clipped_area(const PrPoint& a, const PrPoint& b, double floor) {
  const double w = b.recall - a.recall;
  if (w <= 0.0) return 0.0;
  const bool a_in = a.precision >= floor, b_in = b.precision >= floor;
  if (a_in && b_in) return w * (a.precision + b.precision) / 2.0;
  if (!a_in && !b_in) return 0.0;
  const double t = (floor - a.precision) / (b.precision - a.precision);
  const double r = a.recall + t * w;
  return a_in ? (r - a.recall) * (a.precision + floor) / 2.0 : (b.recall - r) * (floor + b.precision) / 2.0;
}

}  // namespace

double area_above(std::span<const PrPoint> curve, double floor) {
  double total = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) total += positive_part(curve[i - 1], curve[i], floor);
  return total;
}

double area_where_at_least(std::span<const PrPoint> curve, double floor) {
  double total = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) total += clipped_area(curve[i - 1], curve[i], floor);
  return total;
}

double normalized_auc(std::span<const PrPoint> curve, double floor) {
  if (!(floor > 0.0 && floor < 1.0)) throw std::invalid_argument("random baseline precision must lie in (0, 1)");
  return (area_where_at_least(curve, floor) - floor) / (1.0 - floor);
}

double floored_auc(std::span<const PrPoint> curve, double floor) {
  if (!(floor >= 0.0 && floor < 1.0)) throw std::invalid_argument("precision floor must lie in [0, 1)");
  return area_above(curve, floor) / (1.0 - floor);
}

MetricsReport evaluate_scores(std::span<const std::optional<double>> scores, std::span<const bool> labels,
                              LeftBoundary boundary) {
  if (scores.size() != labels.size()) throw std::invalid_argument("scores and labels differ in length");
  MetricsReport r;
  std::vector<double> ranked(scores.size());
  std::size_t scored_positives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    ranked[i] = scores[i] ? *scores[i] : -std::numeric_limits<double>::infinity();
    if (labels[i]) {
      ++r.positives;
      if (scores[i]) ++scored_positives;
    } else {
      ++r.negatives;
    }
    if (scores[i]) ++r.scored;
  }
  if (r.negatives == 0) throw std::invalid_argument("normalized AUC needs at least one negative");
  r.curve = pr_curve(ranked, labels, boundary);
  r.xi = static_cast<double>(r.positives) / static_cast<double>(scores.size());
  r.recall_ceiling = static_cast<double>(scored_positives) / static_cast<double>(r.positives);
  r.auc_xi = area_where_at_least(r.curve, r.xi);
  r.auc_norm = normalized_auc(r.curve, r.xi);
  r.auc_50 = floored_auc(r.curve, 0.5);
  return r;
}

void write_curve_csv(std::ostream& out, std::span<const PrPoint> curve) {
  out << "recall,precision\n";
  const auto old_precision = out.precision(17);
  for (const auto& p : curve) out << p.recall << ',' << p.precision << '\n';
  out.precision(old_precision);
}

}  // namespace booqa
