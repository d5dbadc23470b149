#include "gin/analytics/roc.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>

#include "gin/error.hpp"

namespace gin::analytics {

RocCurve roc_auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ValidationError("roc_auc: scores and labels differ in length");
  std::int64_t positives = 0, negatives = 0;
  for (int l : labels) {
    if (l == 1) {
      ++positives;
    } else if (l == 0) {
      ++negatives;
    } else {
      throw ValidationError("roc_auc: labels must be 0 or 1");
    }
  }
  if (positives == 0 || negatives == 0) throw ValidationError("roc_auc: both classes must be present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  // Twice the area in units of one positive-negative pair, kept in integers so
  // the result is exact.
  std::int64_t twice_area = 0;
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    const double threshold = scores[order[i]];
    const std::int64_t tp_prev = tp, fp_prev = fp;
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] == 1 ? tp : fp) += 1;
      ++i;
    }
    twice_area += (fp - fp_prev) * (tp + tp_prev);
    curve.points.push_back({threshold, static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives)});
  }
  curve.auc = static_cast<double>(twice_area) / (2.0 * static_cast<double>(positives) * static_cast<double>(negatives));
  return curve;
}

}  // namespace gin::analytics
