#include "gin/analytics/cross_validation.hpp"

#include <map>
#include <string>

#include "gin/error.hpp"

namespace gin::analytics {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double Confusion::accuracy() const { return ratio(tp + tn, total()); }
double Confusion::sensitivity() const { return ratio(tp, tp + fn); }
double Confusion::specificity() const { return ratio(tn, tn + fp); }

std::vector<std::size_t> assign_folds(const FeatureMatrix& features, std::size_t k, Rng& rng) {
  features.validate();
  if (k < 2) throw ValidationError("cross-validation needs at least 2 folds");

  // Groups in first-appearance order, split by class.
  std::map<std::size_t, std::size_t> group_slot;
  std::vector<std::size_t> group_ids;
  std::vector<int> group_label;
  for (std::size_t r = 0; r < features.rows; ++r) {
    const auto [it, inserted] = group_slot.try_emplace(features.groups[r], group_ids.size());
    if (inserted) {
      group_ids.push_back(features.groups[r]);
      group_label.push_back(features.labels[r]);
    } else if (group_label[it->second] != features.labels[r]) {
      throw ValidationError("group " + std::to_string(features.groups[r]) + " mixes labels");
    }
  }

  std::vector<std::size_t> group_fold(group_ids.size());
  std::size_t next = 0;
  for (int label : {0, 1}) {
    std::vector<std::size_t> members;
    for (std::size_t g = 0; g < group_ids.size(); ++g) {
      if (group_label[g] == label) members.push_back(g);
    }
    if (members.size() < k) {
      throw ValidationError("class " + std::string(label ? "high" : "low") + " has " + std::to_string(members.size()) +
                            " records, fewer than the " + std::to_string(k) + " folds");
    }
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[rng.index(i)]);
    }
    for (std::size_t g : members) group_fold[g] = next++ % k;
  }

  std::vector<std::size_t> fold(features.rows);
  for (std::size_t r = 0; r < features.rows; ++r) fold[r] = group_fold[group_slot.at(features.groups[r])];
  return fold;
}

FoldMetrics cross_validate(const FeatureMatrix& features, const ForestConfig& cfg, std::size_t k, Rng& rng) {
  cfg.validate();
  const auto fold_of = assign_folds(features, k, rng);

  FoldMetrics out;
  for (std::size_t f = 0; f < k; ++f) {
    FoldResult res;
    res.fold = f;
    for (std::size_t r = 0; r < features.rows; ++r) {
      if (fold_of[r] != f) {
        res.train_rows.push_back(r);
      } else if (features.ids[r] == features.groups[r]) {
        // Augmented copies of held-out records are dropped: augmentation
        // only ever enlarges the training side.
        res.test_rows.push_back(r);
      }
    }
    const FeatureMatrix train = features.subset(res.train_rows);
    const ForestModel forest = train_forest(train, cfg, rng);

    std::vector<int> test_labels;
    for (std::size_t r : res.test_rows) {
      const double p = predict_proba(forest, features.row(r));
      res.test_proba.push_back(p);
      const int truth = features.labels[r];
      test_labels.push_back(truth);
      const int pred = predict_class(p);
      if (truth == 1) {
        (pred == 1 ? res.confusion.tp : res.confusion.fn) += 1;
      } else {
        (pred == 1 ? res.confusion.fp : res.confusion.tn) += 1;
      }
    }
    res.accuracy = res.confusion.accuracy();
    res.sensitivity = res.confusion.sensitivity();
    res.specificity = res.confusion.specificity();
    res.roc = roc_auc(res.test_proba, test_labels);
    out.mean_accuracy += res.accuracy / static_cast<double>(k);
    out.mean_sensitivity += res.sensitivity / static_cast<double>(k);
    out.mean_specificity += res.specificity / static_cast<double>(k);
    out.mean_auc += res.roc.auc / static_cast<double>(k);
    out.folds.push_back(std::move(res));
  }
  return out;
}

}  // namespace gin::analytics
