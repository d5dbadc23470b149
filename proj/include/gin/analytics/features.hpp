#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gin/gan/model.hpp"
#include "gin/synth/valve.hpp"

namespace gin::analytics {

// One row per sample. `groups` ties augmented copies to their base record so
// that fold assignment never separates them.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<float> values;       // rows x cols, row-major
  std::vector<int> labels;         // 0 = low PVL, 1 = high PVL (positive class)
  std::vector<std::size_t> ids;    // record ids
  std::vector<std::size_t> groups; // base record ids

  std::span<const float> row(std::size_t i) const { return {values.data() + i * cols, cols}; }

  // Sizes consistent, values finite, labels binary.
  void validate() const;

  FeatureMatrix subset(std::span<const std::size_t> rows_to_keep) const;
};

// Builds a matrix with ids = groups = 0..n-1 from raw rows.
FeatureMatrix make_features(std::size_t cols, std::vector<float> values, std::vector<int> labels);

// Row i = invert(inv, record i image), in dataset order.
FeatureMatrix extract_features(const gan::InverseModel& inv, const synth::Dataset& data);

}  // namespace gin::analytics
