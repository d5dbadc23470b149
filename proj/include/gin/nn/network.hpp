#pragma once

#include <vector>

#include "gin/nn/layer.hpp"
#include "gin/nn/params.hpp"
#include "gin/nn/tensor.hpp"
#include "gin/rng.hpp"

namespace gin::nn {

// Which gradients backward() should produce. Skipping the input gradient of
// the first layer (or all parameter gradients, when only the input gradient
// is wanted) saves a matrix product per layer.
struct GradRequest {
  bool params = true;
  bool input = true;
};

template <typename T>
struct BasicGradients {
  BasicParams<T> params;  // trainable entries only, same names and order
  BasicTensor<T> input;   // empty unless requested
};

// Fixed sequential stack of layers with reverse-mode differentiation.
//
// Input tensors carry a leading batch dimension followed by the per-sample
// shape given at construction. A train-mode forward caches the activations
// that the following backward() consumes; eval-mode forwards leave both the
// cache and the batch-norm running statistics alone.
//
// Not thread-safe per instance (the cache is mutable state); distinct
// instances are independent.
template <typename T>
class BasicNetwork {
 public:
  using TensorT = BasicTensor<T>;

  BasicNetwork() = default;
  BasicNetwork(std::vector<LayerSpec> layers, Shape sample_shape);

  // Glorot-uniform weights, zero biases, unit batch-norm scale.
  void initialize(Rng& rng);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  const Shape& input_shape() const { return shapes_.front(); }
  const Shape& output_shape() const { return shapes_.back(); }
  BasicParams<T>& params() { return params_; }
  const BasicParams<T>& params() const { return params_; }
  std::size_t parameter_count() const { return params_.trainable_count(); }

  // Train mode caches activations for backward() and updates batch-norm
  // running statistics; eval mode is equivalent to infer().
  TensorT forward(const TensorT& input, Mode mode);

  // Eval-mode forward; touches no state, safe for concurrent use.
  TensorT infer(const TensorT& input) const;

  // Requires the most recent train-mode forward to have seen `input`.
  BasicGradients<T> backward(const TensorT& input, const TensorT& output_grad, GradRequest request = {});

  void clear_cache() { cache_ = {}; }

  template <typename U>
  BasicNetwork<U> cast() const {
    BasicNetwork<U> out(layers_, shapes_.front());
    out.params() = params_.template cast<U>();
    return out;
  }

 private:
  struct Cache {
    bool valid = false;
    std::vector<TensorT> activations;  // activations[i] is the input of layer i
    std::vector<TensorT> aux;          // im2col columns (conv) or normalized values (batch norm)
    std::vector<std::vector<double>> inv_std;
    std::vector<std::vector<double>> batch_mean;  // batch statistics for the running averages
    std::vector<std::vector<double>> batch_var;
  };

  TensorT run(const TensorT& input, Cache* cache) const;

  void check_input(const TensorT& input) const;

  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;  // per-sample shapes, shapes_[i] = input of layer i
  BasicParams<T> params_;
  std::vector<std::vector<std::size_t>> param_index_;  // per layer, indices into params_
  Cache cache_;
};

using Network = BasicNetwork<float>;
using Gradients = BasicGradients<float>;

}  // namespace gin::nn
