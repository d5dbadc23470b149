#include "gin/image.hpp"

namespace gin {

double GrayImage::mean() const {
  if (pixels.empty()) return 0.0;
  double s = 0.0;
  for (float v : pixels) s += v;
  return s / static_cast<double>(pixels.size());
}

double mse(const GrayImage& a, const GrayImage& b) {
  if (a.height != b.height || a.width != b.width) {
    throw ValidationError("image size mismatch in mse: " + std::to_string(a.height) + "x" + std::to_string(a.width) +
                          " vs " + std::to_string(b.height) + "x" + std::to_string(b.width));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) {
    const double d = static_cast<double>(a.pixels[i]) - b.pixels[i];
    s += d * d;
  }
  return s / static_cast<double>(a.pixels.size());
}

}  // namespace gin
