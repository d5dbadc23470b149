#include "gin/vpgen/vpgen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gin/io/csv.hpp"

namespace gin::vpgen {

std::string to_string(TargetKind kind) {
  switch (kind) {
    case TargetKind::high_pvl: return "high";
    case TargetKind::low_pvl: return "low";
    case TargetKind::boundary: return "boundary";
  }
  return "unknown";
}

TargetKind parse_target_kind(const std::string& text) {
  if (text == "high" || text == "high_pvl") return TargetKind::high_pvl;
  if (text == "low" || text == "low_pvl") return TargetKind::low_pvl;
  if (text == "boundary") return TargetKind::boundary;
  throw ValidationError("unknown generation target '" + text + "' (expected high, low or boundary)");
}

void GenerationTarget::validate() const {
  if (!(tau_high > 0.5 && tau_high <= 1.0)) throw ValidationError("tau_high must be in (0.5, 1]");
  if (!(tau_low >= 0.0 && tau_low < 0.5)) throw ValidationError("tau_low must be in [0, 0.5)");
  if (!(beta > 0.0 && beta <= 0.25)) throw ValidationError("boundary half-width must be in (0, 0.25]");
}

bool GenerationTarget::accepts(double proba) const {
  switch (kind) {
    case TargetKind::high_pvl: return proba >= tau_high;
    case TargetKind::low_pvl: return proba <= tau_low;
    case TargetKind::boundary: return std::abs(proba - 0.5) <= beta;
  }
  return false;
}

namespace {

std::string describe_target(const GenerationTarget& t) {
  switch (t.kind) {
    case TargetKind::high_pvl: return "high (proba >= " + io::format_number(t.tau_high) + ")";
    case TargetKind::low_pvl: return "low (proba <= " + io::format_number(t.tau_low) + ")";
    case TargetKind::boundary: return "boundary (|proba - 0.5| <= " + io::format_number(t.beta) + ")";
  }
  return "";
}

}  // namespace

SamplingExhausted::SamplingExhausted(const GenerationTarget& target, std::size_t attempts, double min_proba,
                                     double max_proba)
    : NumericalError("no sample met target " + describe_target(target) + " in " + std::to_string(attempts) +
                     " attempts: acceptance rate 0, observed proba range [" + io::format_number(min_proba) + ", " +
                     io::format_number(max_proba) + "]"),
      attempts_(attempts),
      min_proba_(min_proba),
      max_proba_(max_proba) {}

VirtualPatient guided_sample(const gan::GanModel& gan, const analytics::ForestModel& forest,
                             const GenerationTarget& target, Rng& rng, std::size_t max_attempts) {
  target.validate();
  if (forest.n_features != gan.latent_dim) {
    throw ValidationError("forest has " + std::to_string(forest.n_features) + " features, GAN latent dimension is " +
                          std::to_string(gan.latent_dim));
  }
  if (max_attempts < 1) throw ValidationError("max_attempts must be >= 1");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t attempt = 1; attempt <= max_attempts; ++attempt) {
    gan::LatentVector u = gan::sample_latent(rng, gan.latent_dim);
    const double p = analytics::predict_proba(forest, u.values);
    lo = std::min(lo, p);
    hi = std::max(hi, p);
    if (target.accepts(p)) {
      VirtualPatient vp;
      vp.image = gan::generate(gan, u);
      vp.u = std::move(u);
      vp.predicted_proba = p;
      vp.target = target.kind;
      vp.attempts = attempt;
      return vp;
    }
  }
  throw SamplingExhausted(target, max_attempts, lo, hi);
}

float AxisRange::value(std::size_t index) const {
  if (index + 1 == steps) return max;
  const double t = static_cast<double>(index) / static_cast<double>(steps - 1);
  return static_cast<float>(static_cast<double>(min) + (static_cast<double>(max) - static_cast<double>(min)) * t);
}

void GridSpec::validate(std::size_t latent_dim) const {
  if (latent_dim < 2) throw ValidationError("a feature grid needs latent dimension >= 2");
  if (dim_x >= latent_dim || dim_y >= latent_dim) {
    throw ValidationError("grid dimensions must be < latent dimension " + std::to_string(latent_dim));
  }
  if (dim_x == dim_y) throw ValidationError("grid dimensions must be distinct");
  for (const AxisRange* r : {&x, &y}) {
    if (r->steps < 2) throw ValidationError("grid axes need at least 2 steps");
    if (!(r->min >= -1.0f && r->max <= 1.0f && r->min <= r->max)) {
      throw ValidationError("grid axis range must satisfy -1 <= min <= max <= 1");
    }
  }
  if (fixed.size() != latent_dim - 2) {
    throw ValidationError("grid needs " + std::to_string(latent_dim - 2) + " fixed values, got " +
                          std::to_string(fixed.size()));
  }
  for (float v : fixed) {
    if (!(v >= -1.0f && v <= 1.0f)) throw ValidationError("fixed grid values must lie in [-1, 1]");
  }
}

gan::LatentVector GridSpec::latent_at(std::size_t col, std::size_t row, std::size_t latent_dim) const {
  gan::LatentVector u;
  u.values.resize(latent_dim);
  std::size_t next = 0;
  for (std::size_t i = 0; i < latent_dim; ++i) {
    if (i == dim_x) {
      u.values[i] = x.value(col);
    } else if (i == dim_y) {
      u.values[i] = y.value(row);
    } else {
      u.values[i] = fixed[next++];
    }
  }
  return u;
}

FeatureGrid feature_grid(const gan::GanModel& gan, const GridSpec& spec) {
  spec.validate(gan.latent_dim);
  const std::size_t s = gan.image_size;
  const std::size_t cols = spec.x.steps, rows = spec.y.steps;
  FeatureGrid grid;
  grid.tiles.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) grid.tiles.push_back(gan::generate(gan, spec.latent_at(c, r, gan.latent_dim)));
  }
  grid.montage = GrayImage(rows * s + rows - 1, cols * s + cols - 1, 1.0f);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const GrayImage& tile = grid.tiles[r * cols + c];
      for (std::size_t y = 0; y < s; ++y) {
        for (std::size_t x = 0; x < s; ++x) grid.montage.at(r * (s + 1) + y, c * (s + 1) + x) = tile.at(y, x);
      }
    }
  }
  return grid;
}

ConsistencyReport classify_virtual(const analytics::ForestModel& forest, const gan::InverseModel& inv,
                                   const VirtualPatient& vp) {
  ConsistencyReport report;
  report.reextracted = gan::invert(inv, vp.image);
  if (report.reextracted.dim() != vp.u.dim()) throw ValidationError("inverse and virtual patient dimensions differ");
  for (std::size_t i = 0; i < vp.u.dim(); ++i) {
    report.linf_distance = std::max(
        report.linf_distance, std::abs(static_cast<double>(report.reextracted.values[i]) - vp.u.values[i]));
  }
  report.reextracted_proba = analytics::predict_proba(forest, report.reextracted.values);
  report.class_kept =
      analytics::predict_class(report.reextracted_proba) == analytics::predict_class(vp.predicted_proba);
  return report;
}

}  // namespace gin::vpgen
