#include "gin/synth/valve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gin/rng.hpp"

namespace gin::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double kLumen = 0.05;
constexpr double kWall = 0.25;          // plus up to 0.35 with calcification
constexpr double kWallCalcGain = 0.35;
constexpr double kTissue = 0.12;
constexpr double kFieldOfView = 0.94;   // fraction of the half-width
constexpr double kWallThickness = 0.09;  // fraction of the image side
constexpr double kNoduleRadius = 0.17;   // fraction of the image side at full calcification
constexpr double kEdge = 1.0;            // half-width of the intensity ramp at every boundary, pixels

// Reduces to [0, 2pi) on a grid of 2^-32 turns so that theta and theta + 2pi
// give bit-identical renders.
double canonical_angle(double a) {
  double r = std::fmod(a, kTwoPi);
  if (r < 0) r += kTwoPi;
  const double steps = std::nearbyint(r / kTwoPi * 4294967296.0);
  return std::fmod(steps, 4294967296.0) * (kTwoPi / 4294967296.0);
}

// 0 below lo, 1 above hi, smooth in between.
double smoothstep(double lo, double hi, double x) {
  const double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

void require(bool ok, const char* what) {
  if (!ok) throw ValidationError(std::string("valve parameter out of range: ") + what);
}

}  // namespace

void ValveParams::validate() const {
  require(std::isfinite(theta), "theta must be finite");
  require(eccentricity >= 0.6 && eccentricity <= 1.0, "eccentricity in [0.6, 1]");
  require(radius >= 0.5 && radius <= 0.8, "radius in [0.5, 0.8]");
  require(calcification >= 0.0 && calcification <= 1.0, "calcification in [0, 1]");
  require(std::isfinite(nodule_angle), "nodule_angle must be finite");
  require(noise_sigma >= 0.0 && noise_sigma <= 0.05, "noise_sigma in [0, 0.05]");
}

std::size_t Dataset::base_count() const {
  return static_cast<std::size_t>(
      std::count_if(records.begin(), records.end(), [](const PatientRecord& r) { return !r.augmented_from; }));
}

GrayImage render_valve(const ValveParams& params, std::size_t size, std::uint64_t noise_seed) {
  if (size < kMinImageSize) {
    throw ValidationError("image size must be at least " + std::to_string(kMinImageSize) + ", got " +
                          std::to_string(size));
  }
  params.validate();

  const double n = static_cast<double>(size);
  const double half = n / 2.0;
  const double center = (n - 1.0) / 2.0;
  const double theta = canonical_angle(params.theta);
  const double phi = canonical_angle(params.nodule_angle);
  const double ct = std::cos(theta), st = std::sin(theta);

  const double major = params.radius * half;
  const double minor = major * params.eccentricity;
  const double scale = std::sqrt(major * minor);
  const double half_wall = kWallThickness * n / 2.0;
  const double fov = kFieldOfView * half;

  // Nodule sits on the wall at parametric angle phi of the ellipse frame.
  const double lx = major * std::cos(phi), ly = minor * std::sin(phi);
  const double nx = center + ct * lx - st * ly;
  const double ny = center + st * lx + ct * ly;
  const double nodule_r = kNoduleRadius * n * params.calcification;
  const double nodule_value = 0.6 + 0.4 * params.calcification;
  const double nodule_gain = std::min(1.0, 2.0 * nodule_r);
  const double wall_value = kWall + kWallCalcGain * params.calcification;

  GrayImage img(size, size);
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double dx = static_cast<double>(x) - center;
      const double dy = static_cast<double>(y) - center;

      // Ellipse frame coordinates.
      const double u = ct * dx + st * dy;
      const double v = -st * dx + ct * dy;
      const double rho = std::sqrt((u / major) * (u / major) + (v / minor) * (v / minor));
      const double dist = (rho - 1.0) * scale;  // approximate signed distance to the wall centerline

      const double inside = 1.0 - smoothstep(-half_wall - kEdge, -half_wall + kEdge, dist);
      const double outside = smoothstep(half_wall - kEdge, half_wall + kEdge, dist);
      const double wall = 1.0 - inside - outside;
      double value = inside * kLumen + wall * wall_value + outside * kTissue;

      const double r = std::hypot(dx, dy);
      value *= 1.0 - smoothstep(fov - kEdge, fov + kEdge, r);

      const double nd = std::hypot(static_cast<double>(x) - nx, static_cast<double>(y) - ny);
      const double coverage = 1.0 - smoothstep(nodule_r - kEdge, nodule_r + kEdge, nd);
      value = std::max(value, nodule_value * coverage * nodule_gain);

      img.at(y, x) = static_cast<float>(value);
    }
  }

  if (params.noise_sigma > 0.0) {
    Rng rng(noise_seed);
    for (float& p : img.pixels) {
      p = static_cast<float>(std::clamp(p + params.noise_sigma * rng.normal(), 0.0, 1.0));
    }
  }
  return img;
}

Pvl label_pvl(const ValveParams& params) {
  return params.calcification > kHighPvlThreshold ? Pvl::high : Pvl::low;
}

GrayImage rotate_image(const GrayImage& image, double angle) {
  if (!image.is_square()) {
    throw ValidationError("rotate_image needs a square image, got " + std::to_string(image.height) + "x" +
                          std::to_string(image.width));
  }
  const std::size_t n = image.width;
  const double center = (static_cast<double>(n) - 1.0) / 2.0;
  const double c = std::cos(angle), s = std::sin(angle);
  const auto sample = [&](std::ptrdiff_t yy, std::ptrdiff_t xx) -> double {
    if (yy < 0 || xx < 0 || yy >= static_cast<std::ptrdiff_t>(n) || xx >= static_cast<std::ptrdiff_t>(n)) return 0.0;
    return image.at(static_cast<std::size_t>(yy), static_cast<std::size_t>(xx));
  };

  GrayImage out(n, n);
  for (std::size_t y = 0; y < n; ++y) {
    for (std::size_t x = 0; x < n; ++x) {
      const double dx = static_cast<double>(x) - center;
      const double dy = static_cast<double>(y) - center;
      // Inverse map: output pixel p reads the input at R(-angle) p.
      const double sx = center + c * dx + s * dy;
      const double sy = center - s * dx + c * dy;
      const double fx = std::floor(sx), fy = std::floor(sy);
      const double wx = sx - fx, wy = sy - fy;
      const auto ix = static_cast<std::ptrdiff_t>(fx), iy = static_cast<std::ptrdiff_t>(fy);
      const double top = (1.0 - wx) * sample(iy, ix) + wx * sample(iy, ix + 1);
      const double bottom = (1.0 - wx) * sample(iy + 1, ix) + wx * sample(iy + 1, ix + 1);
      out.at(y, x) = static_cast<float>(std::clamp((1.0 - wy) * top + wy * bottom, 0.0, 1.0));
    }
  }
  return out;
}

std::vector<PatientRecord> augment(const PatientRecord& record) {
  std::vector<PatientRecord> out;
  out.reserve(kAugmentDegrees.size() + 1);
  out.push_back(record);
  for (std::size_t k = 0; k < kAugmentDegrees.size(); ++k) {
    const double angle = kAugmentDegrees[k] * std::numbers::pi / 180.0;
    PatientRecord copy;
    copy.id = record.id + k + 1;
    copy.image = rotate_image(record.image, angle);
    copy.pvl_label = record.pvl_label;
    copy.params = record.params;
    copy.params.theta = canonical_angle(record.params.theta + angle);
    copy.augmented_from = record.base_id();
    out.push_back(std::move(copy));
  }
  return out;
}

ValveParams sample_params(std::uint64_t seed) {
  Rng rng(seed);
  ValveParams p;
  p.theta = rng.uniform(0.0, kTwoPi);
  p.eccentricity = rng.uniform(0.6, 1.0);
  p.radius = rng.uniform(0.5, 0.8);
  p.calcification = rng.beta_int(2, 3);
  p.nodule_angle = rng.uniform(0.0, kTwoPi);
  p.noise_sigma = rng.uniform(0.0, 0.05);
  return p;
}

Dataset make_dataset(std::size_t n_base, std::size_t size, std::uint64_t seed, bool augment_records) {
  if (n_base < 8) throw ValidationError("n_base must be at least 8, got " + std::to_string(n_base));
  if (size < kMinImageSize) {
    throw ValidationError("image size must be at least " + std::to_string(kMinImageSize));
  }
  const std::size_t per_base = augment_records ? kAugmentDegrees.size() + 1 : 1;

  Dataset ds;
  ds.seed = seed;
  ds.augmented = augment_records;
  ds.records.resize(n_base * per_base);

  const auto count = static_cast<std::int64_t>(n_base);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < count; ++i) {
    const auto index = static_cast<std::size_t>(i);
    const std::uint64_t record_seed = derive_seed(seed, index);
    PatientRecord base;
    base.id = index * per_base;
    base.params = sample_params(record_seed);
    base.pvl_label = label_pvl(base.params);
    base.image = render_valve(base.params, size, splitmix64(record_seed));
    if (augment_records) {
      auto copies = augment(base);
      std::move(copies.begin(), copies.end(), ds.records.begin() + static_cast<std::ptrdiff_t>(index * per_base));
    } else {
      ds.records[index] = std::move(base);
    }
  }
  return ds;
}

}  // namespace gin::synth
