#include "gin/gan/model.hpp"

#include <algorithm>
#include <string>

namespace gin::gan {

using nn::LayerSpec;
using nn::Tensor;

void validate_latent_dim(std::size_t d) {
  if (d < 1 || d > kMaxLatentDim) {
    throw ValidationError("latent dimension must lie in [1, " + std::to_string(kMaxLatentDim) + "], got " +
                          std::to_string(d));
  }
}

LatentVector sample_latent(Rng& rng, std::size_t d) {
  validate_latent_dim(d);
  LatentVector u;
  u.values.resize(d);
  for (float& v : u.values) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return u;
}

Tensor sample_latent_batch(Rng& rng, std::size_t d, std::size_t count) {
  validate_latent_dim(d);
  Tensor t({count, d});
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

std::vector<LayerSpec> generator_layers(std::size_t latent_dim, std::size_t image_size, std::size_t hidden) {
  return {LayerSpec::dense(latent_dim, hidden), LayerSpec::relu(),
          LayerSpec::dense(hidden, hidden),     LayerSpec::relu(),
          LayerSpec::dense(hidden, image_size * image_size), LayerSpec::sigmoid()};
}

std::vector<LayerSpec> critic_layers(std::size_t image_size, std::size_t hidden) {
  return {LayerSpec::dense(image_size * image_size, hidden), LayerSpec::relu(),
          LayerSpec::dense(hidden, hidden),                  LayerSpec::relu(),
          LayerSpec::dense(hidden, 1)};
}

std::vector<LayerSpec> inverse_layers(std::size_t latent_dim, std::size_t image_size) {
  std::vector<LayerSpec> layers = {
      LayerSpec::conv2d(1, 8, 5, 2, 2),  LayerSpec::batch_norm(8),  LayerSpec::leaky_relu(0.2f),
      LayerSpec::conv2d(8, 16, 5, 2, 2), LayerSpec::batch_norm(16), LayerSpec::leaky_relu(0.2f),
      LayerSpec::flatten()};
  nn::Shape shape{1, image_size, image_size};
  for (const auto& l : layers) shape = l.output_shape(shape);
  layers.push_back(LayerSpec::dense(shape[0], 512));
  layers.push_back(LayerSpec::leaky_relu(0.2f));
  layers.push_back(LayerSpec::dense(512, latent_dim));
  layers.push_back(LayerSpec::tanh());
  return layers;
}

GanModel make_gan(std::size_t latent_dim, std::size_t image_size, std::size_t hidden, float clip_c, Rng& rng) {
  validate_latent_dim(latent_dim);
  if (!(clip_c > 0.0f)) throw ValidationError("clip constant must be positive");
  GanModel m;
  m.latent_dim = latent_dim;
  m.image_size = image_size;
  m.clip_c = clip_c;
  m.generator = nn::Network(generator_layers(latent_dim, image_size, hidden), {latent_dim});
  m.critic = nn::Network(critic_layers(image_size, hidden), {image_size * image_size});
  m.generator.initialize(rng);
  m.critic.initialize(rng);
  nn::clip_params(m.critic.params(), clip_c);
  return m;
}

InverseModel make_inverse(std::size_t latent_dim, std::size_t image_size, Rng& rng) {
  validate_latent_dim(latent_dim);
  InverseModel m;
  m.latent_dim = latent_dim;
  m.image_size = image_size;
  m.network = nn::Network(inverse_layers(latent_dim, image_size), {1, image_size, image_size});
  m.network.initialize(rng);
  return m;
}

Tensor generate_batch(const GanModel& model, const Tensor& latents) {
  if (latents.rank() != 2 || latents.dim(1) != model.latent_dim) {
    throw ValidationError("latent batch shape " + nn::shape_string(latents.shape()) + " does not match model dimension " +
                          std::to_string(model.latent_dim));
  }
  return model.generator.infer(latents);
}

Tensor invert_batch(const InverseModel& inv, const Tensor& images) {
  const std::size_t pixels = inv.image_size * inv.image_size;
  if (images.rank() != 2 || images.dim(1) != pixels) {
    throw ValidationError("image batch shape " + nn::shape_string(images.shape()) + " does not match inverse input " +
                          std::to_string(inv.image_size) + "x" + std::to_string(inv.image_size));
  }
  Tensor out = inv.network.infer(images.reshaped({images.dim(0), 1, inv.image_size, inv.image_size}));
  for (float& v : out.data()) v = std::clamp(v, -1.0f, 1.0f);
  return out;
}

Tensor images_to_tensor(const std::vector<GrayImage>& images) {
  if (images.empty()) throw ValidationError("no images");
  const std::size_t pixels = images.front().size();
  Tensor t({images.size(), pixels});
  for (std::size_t i = 0; i < images.size(); ++i) {
    if (images[i].size() != pixels) throw ValidationError("images differ in size");
    std::copy(images[i].pixels.begin(), images[i].pixels.end(), t.raw() + i * pixels);
  }
  return t;
}

GrayImage tensor_row_to_image(const Tensor& rows, std::size_t row, std::size_t size) {
  const float* p = rows.raw() + row * size * size;
  return GrayImage(size, size, std::vector<float>(p, p + size * size));
}

GrayImage generate(const GanModel& model, const LatentVector& u) {
  if (u.dim() != model.latent_dim) {
    throw ValidationError("latent vector has dimension " + std::to_string(u.dim()) + ", model expects " +
                          std::to_string(model.latent_dim));
  }
  const Tensor out = generate_batch(model, Tensor({1, u.dim()}, u.values));
  return tensor_row_to_image(out, 0, model.image_size);
}

LatentVector invert(const InverseModel& inv, const GrayImage& image) {
  if (image.height != inv.image_size || image.width != inv.image_size) {
    throw ValidationError("image is " + std::to_string(image.height) + "x" + std::to_string(image.width) +
                          ", inverse expects " + std::to_string(inv.image_size) + "x" + std::to_string(inv.image_size));
  }
  const Tensor out = invert_batch(inv, Tensor({1, image.size()}, image.pixels));
  return LatentVector{out.values()};
}

Reconstruction reconstruct(const GanModel& gan, const InverseModel& inv, const GrayImage& image) {
  if (gan.latent_dim != inv.latent_dim || gan.image_size != inv.image_size) {
    throw ValidationError("generator and inverse models are incompatible");
  }
  Reconstruction r;
  r.image = generate(gan, invert(inv, image));
  r.mse = mse(r.image, image);
  return r;
}

}  // namespace gin::gan
