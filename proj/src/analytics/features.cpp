#include "gin/analytics/features.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace gin::analytics {

void FeatureMatrix::validate() const {
  if (values.size() != rows * cols) throw ValidationError("feature matrix values do not match rows x cols");
  if (labels.size() != rows || ids.size() != rows || groups.size() != rows) {
    throw ValidationError("feature matrix labels/ids/groups must have one entry per row");
  }
  for (float v : values) {
    if (!std::isfinite(v)) throw ValidationError("feature matrix contains a non-finite value");
  }
  for (int l : labels) {
    if (l != 0 && l != 1) throw ValidationError("labels must be 0 or 1");
  }
}

FeatureMatrix FeatureMatrix::subset(std::span<const std::size_t> rows_to_keep) const {
  FeatureMatrix out;
  out.cols = cols;
  out.rows = rows_to_keep.size();
  out.values.reserve(out.rows * cols);
  for (std::size_t r : rows_to_keep) {
    const auto src = row(r);
    out.values.insert(out.values.end(), src.begin(), src.end());
    out.labels.push_back(labels[r]);
    out.ids.push_back(ids[r]);
    out.groups.push_back(groups[r]);
  }
  return out;
}

FeatureMatrix make_features(std::size_t cols, std::vector<float> values, std::vector<int> labels) {
  FeatureMatrix m;
  m.cols = cols;
  m.rows = labels.size();
  m.values = std::move(values);
  m.labels = std::move(labels);
  m.ids.resize(m.rows);
  std::iota(m.ids.begin(), m.ids.end(), std::size_t{0});
  m.groups = m.ids;
  m.validate();
  return m;
}

FeatureMatrix extract_features(const gan::InverseModel& inv, const synth::Dataset& data) {
  if (data.records.empty()) throw ValidationError("cannot extract features from an empty dataset");
  std::vector<GrayImage> images;
  images.reserve(data.records.size());
  for (const auto& r : data.records) {
    if (r.image.height != inv.image_size || r.image.width != inv.image_size) {
      throw ValidationError("record " + std::to_string(r.id) + " is " + std::to_string(r.image.height) + "x" +
                            std::to_string(r.image.width) + ", inverse expects " + std::to_string(inv.image_size));
    }
    images.push_back(r.image);
  }

  FeatureMatrix m;
  m.rows = data.records.size();
  m.cols = inv.latent_dim;
  m.values.reserve(m.rows * m.cols);
  // Chunked so that memory stays bounded on large datasets.
  constexpr std::size_t chunk = 256;
  for (std::size_t start = 0; start < images.size(); start += chunk) {
    const std::size_t end = std::min(images.size(), start + chunk);
    const std::vector<GrayImage> part(images.begin() + static_cast<std::ptrdiff_t>(start),
                                      images.begin() + static_cast<std::ptrdiff_t>(end));
    const nn::Tensor out = gan::invert_batch(inv, gan::images_to_tensor(part));
    m.values.insert(m.values.end(), out.values().begin(), out.values().end());
  }
  for (const auto& r : data.records) {
    m.labels.push_back(static_cast<int>(r.pvl_label));
    m.ids.push_back(r.id);
    m.groups.push_back(r.base_id());
  }
  m.validate();
  return m;
}

}  // namespace gin::analytics
