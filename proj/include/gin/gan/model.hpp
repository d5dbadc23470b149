#pragma once

#include <cstddef>
#include <vector>

#include "gin/image.hpp"
#include "gin/nn/network.hpp"
#include "gin/rng.hpp"

namespace gin::gan {

// Feature-space dimension is capped; beyond this the regression inverse
// stops training reliably.
inline constexpr std::size_t kMaxLatentDim = 20;

void validate_latent_dim(std::size_t d);

// A point of the feature space, components in [-1, 1].
struct LatentVector {
  std::vector<float> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const LatentVector&) const = default;
};

// i.i.d. uniform components on [-1, 1].
LatentVector sample_latent(Rng& rng, std::size_t d);
nn::Tensor sample_latent_batch(Rng& rng, std::size_t d, std::size_t count);

// Generator maps (N, d) -> (N, size*size) through a terminal sigmoid; the
// critic maps (N, size*size) -> (N, 1) with no output activation.
struct GanModel {
  nn::Network generator;
  nn::Network critic;
  std::size_t latent_dim = 0;
  std::size_t image_size = 0;
  float clip_c = 0.01f;
};

// Convolutional regressor (N, 1, size, size) -> (N, d), tanh output.
struct InverseModel {
  nn::Network network;
  std::size_t latent_dim = 0;
  std::size_t image_size = 0;
};

std::vector<nn::LayerSpec> generator_layers(std::size_t latent_dim, std::size_t image_size, std::size_t hidden);
std::vector<nn::LayerSpec> critic_layers(std::size_t image_size, std::size_t hidden);
std::vector<nn::LayerSpec> inverse_layers(std::size_t latent_dim, std::size_t image_size);

// Freshly initialized models (Glorot weights, zero biases).
GanModel make_gan(std::size_t latent_dim, std::size_t image_size, std::size_t hidden, float clip_c, Rng& rng);
InverseModel make_inverse(std::size_t latent_dim, std::size_t image_size, Rng& rng);

// Batched paths. Images travel as (N, size*size) rows in [0, 1].
nn::Tensor generate_batch(const GanModel& model, const nn::Tensor& latents);
nn::Tensor invert_batch(const InverseModel& inv, const nn::Tensor& images);

nn::Tensor images_to_tensor(const std::vector<GrayImage>& images);
GrayImage tensor_row_to_image(const nn::Tensor& rows, std::size_t row, std::size_t size);

GrayImage generate(const GanModel& model, const LatentVector& u);

// Output clamped to [-1, 1]^d.
LatentVector invert(const InverseModel& inv, const GrayImage& image);

struct Reconstruction {
  GrayImage image;
  double mse = 0.0;
};

// generate(invert(image)) and its per-pixel MSE against the input.
Reconstruction reconstruct(const GanModel& gan, const InverseModel& inv, const GrayImage& image);

}  // namespace gin::gan
