#pragma once

#include <cstddef>
#include <vector>

#include "gin/error.hpp"

namespace gin {

// Row-major grayscale image, intensities nominally in [0, 1].
struct GrayImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> pixels;

  GrayImage() = default;
  GrayImage(std::size_t h, std::size_t w, float fill = 0.0f) : height(h), width(w), pixels(h * w, fill) {}
  GrayImage(std::size_t h, std::size_t w, std::vector<float> values) : height(h), width(w), pixels(std::move(values)) {
    if (pixels.size() != h * w) throw ValidationError("image pixel count does not match its dimensions");
  }

  float& at(std::size_t y, std::size_t x) { return pixels[y * width + x]; }
  float at(std::size_t y, std::size_t x) const { return pixels[y * width + x]; }
  std::size_t size() const { return pixels.size(); }
  bool is_square() const { return height == width; }

  double mean() const;

  bool operator==(const GrayImage&) const = default;
};

// Mean squared per-pixel difference; throws on size mismatch.
double mse(const GrayImage& a, const GrayImage& b);

}  // namespace gin
