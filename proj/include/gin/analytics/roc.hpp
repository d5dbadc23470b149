#pragma once

#include <span>
#include <vector>

namespace gin::analytics {

struct RocPoint {
  double threshold = 0.0;  // predict positive when score >= threshold; +inf for the origin
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) first, (1,1) last
  double auc = 0.0;
};

// Sweeps every distinct score from high to low; tied scores move the curve
// diagonally, which makes the trapezoidal area equal to
// P(score_pos > score_neg) + 0.5 * P(equal). Labels are 0/1 with 1 positive.
RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace gin::analytics
