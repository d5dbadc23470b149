#include "gin/analytics/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gin/error.hpp"

namespace gin::analytics {

void ForestConfig::validate() const {
  if (n_trees < 1) throw ValidationError("forest needs at least one tree");
  if (max_depth < 1) throw ValidationError("forest max_depth must be >= 1");
  if (min_leaf < 1) throw ValidationError("forest min_leaf must be >= 1");
}

double DecisionTree::leaf_frequency(std::span<const float> x) const {
  std::uint32_t at = 0;
  while (!nodes[at].is_leaf()) {
    const TreeNode& n = nodes[at];
    at = x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right;
  }
  const TreeNode& leaf = nodes[at];
  return static_cast<double>(leaf.count_high) / static_cast<double>(leaf.count_low + leaf.count_high);
}

namespace {

double gini(std::size_t low, std::size_t high) {
  const double n = static_cast<double>(low + high);
  if (n == 0.0) return 0.0;
  const double p = static_cast<double>(high) / n;
  return 2.0 * p * (1.0 - p);
}

struct Split {
  std::int32_t feature = -1;
  float threshold = 0.0f;
  double decrease = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& x, const ForestConfig& cfg, Rng rng)
      : x_(x), cfg_(cfg), rng_(rng), features_(x.cols), mtry_(static_cast<std::size_t>(std::ceil(std::sqrt(x.cols)))) {
    std::iota(features_.begin(), features_.end(), std::size_t{0});
  }

  DecisionTree build(std::vector<std::uint32_t> sample) {
    const std::size_t n = x_.rows;
    std::vector<char> in_bag(n, 0);
    if (cfg_.bootstrap) {
      sample.resize(n);
      for (auto& s : sample) {
        s = static_cast<std::uint32_t>(rng_.index(n));
        in_bag[s] = 1;
      }
    } else {
      for (auto s : sample) in_bag[s] = 1;
    }
    for (std::uint32_t i = 0; i < n; ++i) {
      if (!in_bag[i]) tree_.out_of_bag.push_back(i);
    }
    grow(sample, 0);
    return std::move(tree_);
  }

 private:
  std::uint32_t grow(std::vector<std::uint32_t>& sample, std::size_t depth) {
    TreeNode node;
    for (auto s : sample) (x_.labels[s] == 1 ? node.count_high : node.count_low) += 1;
    const auto index = static_cast<std::uint32_t>(tree_.nodes.size());
    tree_.nodes.push_back(node);

    const bool pure = node.count_low == 0 || node.count_high == 0;
    if (pure || depth >= cfg_.max_depth || sample.size() < 2 * cfg_.min_leaf) return index;

    const Split split = best_split(sample, node);
    if (split.feature < 0) return index;

    std::vector<std::uint32_t> left, right;
    for (auto s : sample) {
      (x_.row(s)[static_cast<std::size_t>(split.feature)] <= split.threshold ? left : right).push_back(s);
    }
    sample.clear();
    sample.shrink_to_fit();
    tree_.nodes[index].feature = split.feature;
    tree_.nodes[index].threshold = split.threshold;
    const std::uint32_t l = grow(left, depth + 1);
    const std::uint32_t r = grow(right, depth + 1);
    tree_.nodes[index].left = l;
    tree_.nodes[index].right = r;
    return index;
  }

  Split best_split(const std::vector<std::uint32_t>& sample, const TreeNode& node) {
    // Partial Fisher-Yates: the first mtry_ entries become the candidates.
    for (std::size_t i = 0; i < mtry_; ++i) {
      std::swap(features_[i], features_[i + rng_.index(features_.size() - i)]);
    }
    const std::size_t n = sample.size();
    const double parent = gini(node.count_low, node.count_high);
    Split best;
    std::vector<std::pair<float, int>> column(n);
    for (std::size_t c = 0; c < mtry_; ++c) {
      const std::size_t f = features_[c];
      for (std::size_t i = 0; i < n; ++i) column[i] = {x_.row(sample[i])[f], x_.labels[sample[i]]};
      std::sort(column.begin(), column.end());
      std::size_t left_low = 0, left_high = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        (column[i].second == 1 ? left_high : left_low) += 1;
        if (column[i].first == column[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        if (nl < cfg_.min_leaf || nr < cfg_.min_leaf) continue;
        const double decrease =
            parent - (static_cast<double>(nl) * gini(left_low, left_high) +
                      static_cast<double>(nr) * gini(node.count_low - left_low, node.count_high - left_high)) /
                         static_cast<double>(n);
        if (decrease > best.decrease + 1e-12) {
          const float a = column[i].first, b = column[i + 1].first;
          float mid = a + (b - a) * 0.5f;
          if (!(mid >= a && mid < b)) mid = a;
          best = {static_cast<std::int32_t>(f), mid, decrease};
        }
      }
    }
    return best;
  }

  const FeatureMatrix& x_;
  const ForestConfig& cfg_;
  Rng rng_;
  std::vector<std::size_t> features_;
  std::size_t mtry_;
  DecisionTree tree_;
};

}  // namespace

ForestModel train_forest(const FeatureMatrix& features, const ForestConfig& cfg, Rng& rng) {
  cfg.validate();
  features.validate();
  if (features.rows == 0 || features.cols == 0) throw ValidationError("cannot train a forest on an empty matrix");
  const auto highs = std::count(features.labels.begin(), features.labels.end(), 1);
  if (highs == 0 || highs == static_cast<std::ptrdiff_t>(features.rows)) {
    throw ValidationError("forest training labels contain a single class");
  }

  ForestModel model;
  model.n_features = features.cols;
  model.seed = rng.next_u64();
  model.trees.resize(cfg.n_trees);
  std::vector<std::uint32_t> all(features.rows);
  std::iota(all.begin(), all.end(), std::uint32_t{0});
  const auto n_trees = static_cast<std::ptrdiff_t>(cfg.n_trees);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
    TreeBuilder builder(features, cfg, Rng(derive_seed(model.seed, static_cast<std::uint64_t>(t))));
    model.trees[static_cast<std::size_t>(t)] = builder.build(all);
  }
  return model;
}

double predict_proba(const ForestModel& model, std::span<const float> x) {
  if (x.size() != model.n_features) {
    throw ValidationError("feature vector has length " + std::to_string(x.size()) + ", forest expects " +
                          std::to_string(model.n_features));
  }
  if (model.trees.empty()) throw ValidationError("forest has no trees");
  // Summed in sorted order so the result is exactly invariant under tree order.
  std::vector<double> freq;
  freq.reserve(model.trees.size());
  for (const auto& tree : model.trees) freq.push_back(tree.leaf_frequency(x));
  std::sort(freq.begin(), freq.end());
  double sum = 0.0;
  for (double f : freq) sum += f;
  return std::clamp(sum / static_cast<double>(freq.size()), 0.0, 1.0);
}

}  // namespace gin::analytics
