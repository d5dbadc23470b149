#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gin/analytics/features.hpp"
#include "gin/rng.hpp"

namespace gin::analytics {

struct ForestConfig {
  std::size_t n_trees = 500;
  std::size_t max_depth = 16;
  std::size_t min_leaf = 1;
  // Without bootstrap every tree sees the full training set once.
  bool bootstrap = true;

  void validate() const;
};

// Internal nodes send x to `left` when x[feature] <= threshold. Leaves have
// feature == -1. Every node keeps the class counts of the samples that
// reached it; only the leaf counts matter for prediction.
struct TreeNode {
  std::int32_t feature = -1;
  float threshold = 0.0f;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t count_low = 0;
  std::uint32_t count_high = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // pre-order, root first
  std::vector<std::uint32_t> out_of_bag;

  double leaf_frequency(std::span<const float> x) const;
  bool operator==(const DecisionTree&) const = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;
  std::uint64_t seed = 0;

  std::size_t n_trees() const { return trees.size(); }
  bool operator==(const ForestModel&) const = default;
};

// Draws one master seed from rng; tree t is grown from derive_seed(master, t),
// so the result does not depend on how the trees are scheduled.
ForestModel train_forest(const FeatureMatrix& features, const ForestConfig& cfg, Rng& rng);

// Mean over trees of the high-class frequency at the leaf reached by x.
double predict_proba(const ForestModel& model, std::span<const float> x);

// High iff proba > 0.5; an exact tie predicts low.
inline int predict_class(double proba) { return proba > 0.5 ? 1 : 0; }

}  // namespace gin::analytics
