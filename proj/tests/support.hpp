#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>

#include "gin/nn/network.hpp"
#include "gin/rng.hpp"

namespace gin::test {

inline nn::Tensor random_tensor(Rng& rng, nn::Shape shape, double lo = -1.0, double hi = 1.0) {
  nn::Tensor t(std::move(shape));
  for (float& v : t.data()) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

inline nn::Params scalar_params(float v) {
  nn::Params p;
  p.add({"w", nn::ParamRole::weight, 0, nn::Tensor({1}, v)});
  return p;
}

// Smallest |pre-activation| feeding a ReLU or leaky ReLU in a train-mode pass.
inline double kink_margin(const nn::Network& net, const nn::Tensor& input) {
  double margin = 1e300;
  const auto& layers = net.layers();
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].kind != nn::LayerKind::relu && layers[i].kind != nn::LayerKind::leaky_relu) continue;
    nn::Network prefix(std::vector<nn::LayerSpec>(layers.begin(), layers.begin() + static_cast<std::ptrdiff_t>(i)),
                       net.input_shape());
    for (auto& p : prefix.params()) p.value = net.params().at(p.name).value;
    for (float z : prefix.forward(input, nn::Mode::train).data()) margin = std::min(margin, std::abs(static_cast<double>(z)));
  }
  return margin;
}

struct NetCase {
  nn::Network net;
  nn::Tensor input;
};

// Small random network. Over consecutive seeds the cases cycle through
// dense and convolutional stacks, every activation and batch norm on/off, so
// that 8 consecutive seeds use every layer kind.
inline NetCase random_network(std::uint64_t seed) {
  using nn::LayerSpec;
  Rng rng(derive_seed(0x6a7d, seed));
  const auto activation = [&](std::uint64_t pick) {
    switch (pick % 4) {
      case 0: return LayerSpec::leaky_relu(static_cast<float>(rng.uniform(0.05, 0.5)));
      case 1: return LayerSpec::relu();
      case 2: return LayerSpec::sigmoid();
      default: return LayerSpec::tanh();
    }
  };
  const bool conv = seed % 2 == 1;
  const bool bn = (seed / 2) % 2 == 0;
  const std::size_t batch = 2 + rng.index(4);
  std::vector<LayerSpec> layers;
  nn::Shape sample;
  if (conv) {
    const std::size_t ci = 1 + rng.index(2), co = 1 + rng.index(3), size = 4 + rng.index(3);
    const std::size_t k = 1 + rng.index(3), stride = 1 + rng.index(2), pad = rng.index(2);
    sample = {ci, size, size};
    layers.push_back(LayerSpec::conv2d(ci, co, k, stride, pad));
    if (bn) layers.push_back(LayerSpec::batch_norm(co));
    layers.push_back(activation(seed / 4));
    layers.push_back(LayerSpec::flatten());
    const nn::Shape flat = [&] {
      nn::Shape s = sample;
      for (const auto& l : layers) s = l.output_shape(s);
      return s;
    }();
    layers.push_back(LayerSpec::dense(flat[0], 1 + rng.index(3)));
  } else {
    const std::size_t in = 2 + rng.index(5), hidden = 2 + rng.index(6), out = 1 + rng.index(3);
    sample = {in};
    layers.push_back(LayerSpec::dense(in, hidden));
    if (bn) layers.push_back(LayerSpec::batch_norm(hidden));
    layers.push_back(activation(seed / 4));
    layers.push_back(LayerSpec::dense(hidden, out));
    layers.push_back(activation(seed / 4 + 1));
  }
  NetCase c{nn::Network(layers, sample), {}};
  c.net.initialize(rng);
  // Non-trivial scale and shift so batch norm is exercised beyond identity.
  for (auto& p : c.net.params()) {
    if (p.role == nn::ParamRole::scale || p.role == nn::ParamRole::shift || p.role == nn::ParamRole::bias) {
      for (float& v : p.value.data()) v = static_cast<float>(rng.uniform(-0.8, 0.8)) + (p.role == nn::ParamRole::scale ? 1.0f : 0.0f);
    }
  }
  sample.insert(sample.begin(), batch);
  // Central differences are only an oracle where the loss is smooth, so the
  // input is redrawn until no pre-activation sits within reach of a kink.
  // A 1e-3 perturbation moves a pre-activation by about 1e-3 * |w|.
  for (int attempt = 0; attempt < 10000; ++attempt) {
    c.input = random_tensor(rng, sample);
    if (kink_margin(c.net, c.input) >= 3e-3) break;
  }
  return c;
}

}  // namespace gin::test
