#pragma once

#include <cstddef>
#include <vector>

#include "gin/analytics/features.hpp"
#include "gin/analytics/forest.hpp"
#include "gin/analytics/roc.hpp"
#include "gin/rng.hpp"

namespace gin::analytics {

struct Confusion {
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
  double accuracy() const;
  double sensitivity() const;  // TP / (TP + FN); 0 when undefined
  double specificity() const;  // TN / (TN + FP); 0 when undefined
};

struct FoldResult {
  std::size_t fold = 0;
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  std::vector<double> test_proba;  // aligned with test_rows
  Confusion confusion;
  double accuracy = 0.0;
  double sensitivity = 0.0;
  double specificity = 0.0;
  RocCurve roc;
};

struct FoldMetrics {
  std::vector<FoldResult> folds;
  double mean_accuracy = 0.0;
  double mean_sensitivity = 0.0;
  double mean_specificity = 0.0;
  double mean_auc = 0.0;
};

// Fold index per row. Groups (base records) are the unit of assignment:
// within each class the groups are shuffled and dealt round-robin, the deal
// continuing across classes so that overall fold sizes stay balanced too.
// A group's class is the label of its first row.
std::vector<std::size_t> assign_folds(const FeatureMatrix& features, std::size_t k, Rng& rng);

// Stratified, grouped k-fold CV of the random forest. High PVL is the
// positive class. Rows whose id differs from their group are augmented
// copies; they train with their group but are never scored.
FoldMetrics cross_validate(const FeatureMatrix& features, const ForestConfig& cfg, std::size_t k, Rng& rng);

}  // namespace gin::analytics
