#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace booqa {

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  friend bool operator==(const PrPoint&, const PrPoint&) = default;
};

// How the curve is closed towards recall 0. `inclusive` prepends the point
// (0, precision at the first threshold); `first_threshold` starts the area at
// the first operating point and therefore never credits the region before it.
enum class LeftBoundary { inclusive, first_threshold };

LeftBoundary parse_left_boundary(std::string_view name);
std::string_view left_boundary_name(LeftBoundary boundary);

// One point per distinct score, thresholds descending; equal scores enter the
// curve together. Scores may be -infinity (for unscored items) but not NaN.
// Requires at least one positive label.
std::vector<PrPoint> pr_curve(std::span<const double> scores, std::span<const bool> labels,
                              LeftBoundary boundary = LeftBoundary::inclusive);

// Integral over recall of max(precision - floor, 0), piecewise linear between
// consecutive points.
double area_above(std::span<const PrPoint> curve, double floor);

// Integral over recall of precision, restricted to where precision >= floor.
double area_where_at_least(std::span<const PrPoint> curve, double floor);

// Precision-floored area normalized so that a perfect ranking scores 1 and a
// constant ranking 0: (A - floor) / (1 - floor), A = area_where_at_least.
double normalized_auc(std::span<const PrPoint> curve, double floor);

// Area above the floor, rescaled to [0, 1].
double floored_auc(std::span<const PrPoint> curve, double floor);

struct MetricsReport {
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t scored = 0;
  double xi = 0.0;  // positive ratio
  double auc_xi = 0.0;
  double auc_norm = 0.0;
  double auc_50 = 0.0;
  // Fraction of positives that received a score; the curve cannot reach
  // recall above this before the unscored tail.
  double recall_ceiling = 0.0;
  std::vector<PrPoint> curve;
};

// Unscored items (nullopt) rank below every scored item, as one tie group.
MetricsReport evaluate_scores(std::span<const std::optional<double>> scores, std::span<const bool> labels,
                              LeftBoundary boundary = LeftBoundary::inclusive);

void write_curve_csv(std::ostream& out, std::span<const PrPoint> curve);

}  // namespace booqa
