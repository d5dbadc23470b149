#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gin/nn/tensor.hpp"

namespace gin::nn {

enum class LayerKind { dense, conv2d, leaky_relu, relu, sigmoid, tanh, batch_norm, flatten };

enum class Mode { train, eval };

std::string_view to_string(LayerKind kind);

// One stage of a sequential network. Fields that do not apply to `kind` are
// ignored; the factories fill in the relevant ones.
struct LayerSpec {
  LayerKind kind = LayerKind::dense;
  std::size_t in = 0;   // dense fan-in, conv input channels, batch-norm features
  std::size_t out = 0;  // dense fan-out, conv output channels
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;
  float negative_slope = 0.2f;
  float epsilon = 1e-5f;
  float momentum = 0.9f;

  static LayerSpec dense(std::size_t in, std::size_t out);
  static LayerSpec conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                          std::size_t stride = 1, std::size_t padding = 0);
  static LayerSpec leaky_relu(float slope = 0.2f);
  static LayerSpec relu();
  static LayerSpec sigmoid();
  static LayerSpec tanh();
  static LayerSpec batch_norm(std::size_t features, float epsilon = 1e-5f, float momentum = 0.9f);
  static LayerSpec flatten();

  void validate() const;

  // Per-sample output shape for a per-sample input shape; throws ShapeError.
  Shape output_shape(const Shape& sample_in) const;

  // Compact text form, e.g. "conv2d(1,8,k5,s2,p2)"; parse() inverts it exactly.
  std::string describe() const;
  static LayerSpec parse(std::string_view text);

  bool operator==(const LayerSpec&) const = default;
};

std::string describe_layers(const std::vector<LayerSpec>& layers);
std::vector<LayerSpec> parse_layers(std::string_view text);

}  // namespace gin::nn
