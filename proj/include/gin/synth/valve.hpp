#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "gin/image.hpp"

namespace gin::synth {

// Latent factors of one synthetic annulus slice. Angles in radians.
struct ValveParams {
  double theta = 0.0;          // wall orientation, [0, 2pi)
  double eccentricity = 1.0;   // minor/major axis ratio, [0.6, 1]
  double radius = 0.65;        // major semi-axis as a fraction of the half-width, [0.5, 0.8]
  double calcification = 0.0; // nodule size and brightness, [0, 1]
  double nodule_angle = 0.0;   // nodule position along the wall, [0, 2pi)
  double noise_sigma = 0.0;    // additive Gaussian pixel noise, [0, 0.05]

  void validate() const;
  bool operator==(const ValveParams&) const = default;
};

enum class Pvl : int { low = 0, high = 1 };

inline constexpr double kHighPvlThreshold = 0.55;
inline constexpr float kWallCeiling = 0.6f;
inline constexpr std::size_t kMinImageSize = 16;

struct PatientRecord {
  std::size_t id = 0;
  GrayImage image;
  Pvl pvl_label = Pvl::low;
  ValveParams params;
  std::optional<std::size_t> augmented_from;  // id of the base record for rotated copies

  std::size_t base_id() const { return augmented_from.value_or(id); }
};

struct Dataset {
  std::vector<PatientRecord> records;
  std::uint64_t seed = 0;
  bool augmented = false;

  std::size_t base_count() const;
};

// Dark lumen, mid-intensity elliptical wall, bright calcific nodule on the
// wall, inside a circular field of view. With noise_sigma > 0 the noise is
// drawn from `noise_seed` and the result clamped to [0, 1].
GrayImage render_valve(const ValveParams& params, std::size_t size, std::uint64_t noise_seed = 0);

// High iff calcification > 0.55 (the boundary value itself is low).
Pvl label_pvl(const ValveParams& params);

// Rotation about the image center with bilinear interpolation. Pixels
// sampled from outside the frame read as 0. Square images only.
GrayImage rotate_image(const GrayImage& image, double angle);

// In-plane augmentation angles in degrees, applied after the original.
inline constexpr std::array<double, 9> kAugmentDegrees = {3, -3, 6, -6, 9, -9, 12, -12, 15};

// The original record followed by nine rotated copies, labels unchanged.
// Copies get ids record.id + 1 .. record.id + 9.
std::vector<PatientRecord> augment(const PatientRecord& record);

ValveParams sample_params(std::uint64_t seed);

// Base records are drawn independently from per-record sub-seeds of `seed`.
// Augmented datasets interleave each base record with its nine copies.
Dataset make_dataset(std::size_t n_base, std::size_t size, std::uint64_t seed, bool augment);

}  // namespace gin::synth
