#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "gin/analytics/forest.hpp"
#include "gin/error.hpp"
#include "gin/gan/model.hpp"
#include "gin/rng.hpp"

namespace gin::vpgen {

enum class TargetKind { high_pvl, low_pvl, boundary };

std::string to_string(TargetKind kind);
TargetKind parse_target_kind(const std::string& text);  // "high", "low", "boundary"

struct GenerationTarget {
  TargetKind kind = TargetKind::high_pvl;
  double tau_high = 0.7;
  double tau_low = 0.3;
  double beta = 0.1;

  void validate() const;
  bool accepts(double proba) const;
};

struct VirtualPatient {
  gan::LatentVector u;
  GrayImage image;
  double predicted_proba = 0.0;
  TargetKind target = TargetKind::high_pvl;
  std::size_t attempts = 0;
};

inline constexpr std::size_t kDefaultMaxAttempts = 10000;

// No draw was accepted within the attempt budget. The observed proba range
// tells the caller how far the thresholds are from reachable.
class SamplingExhausted : public NumericalError {
 public:
  SamplingExhausted(const GenerationTarget& target, std::size_t attempts, double min_proba, double max_proba);

  std::size_t attempts() const { return attempts_; }
  double acceptance_rate() const { return 0.0; }
  double min_proba() const { return min_proba_; }
  double max_proba() const { return max_proba_; }

 private:
  std::size_t attempts_;
  double min_proba_;
  double max_proba_;
};

// Rejection sampling: u ~ U[-1,1]^d until the forest probability at u
// satisfies the target, then renders generate(gan, u).
VirtualPatient guided_sample(const gan::GanModel& gan, const analytics::ForestModel& forest,
                             const GenerationTarget& target, Rng& rng, std::size_t max_attempts = kDefaultMaxAttempts);

struct AxisRange {
  float min = -1.0f;
  float max = 1.0f;
  std::size_t steps = 5;

  float value(std::size_t index) const;
};

struct GridSpec {
  std::size_t dim_x = 0;  // varies left to right
  std::size_t dim_y = 1;  // varies top to bottom
  AxisRange x;
  AxisRange y;
  std::vector<float> fixed;  // the other d - 2 coordinates, in index order

  void validate(std::size_t latent_dim) const;
  gan::LatentVector latent_at(std::size_t col, std::size_t row, std::size_t latent_dim) const;
};

struct FeatureGrid {
  std::vector<GrayImage> tiles;  // row-major: tiles[row * x.steps + col]
  GrayImage montage;             // tiles with 1-px white separators
};

FeatureGrid feature_grid(const gan::GanModel& gan, const GridSpec& spec);

struct ConsistencyReport {
  gan::LatentVector reextracted;
  double linf_distance = 0.0;  // max |invert(image) - u|
  double reextracted_proba = 0.0;
  bool class_kept = false;     // predicted class unchanged after re-extraction
};

ConsistencyReport classify_virtual(const analytics::ForestModel& forest, const gan::InverseModel& inv,
                                   const VirtualPatient& vp);

}  // namespace gin::vpgen
