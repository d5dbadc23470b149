#pragma once

#include "gin/nn/params.hpp"

namespace gin::nn {

enum class Algorithm { sgd, rmsprop };

struct OptimizerConfig {
  Algorithm algorithm = Algorithm::rmsprop;
  double learning_rate = 5e-5;
  double decay = 0.9;     // RMSProp rho
  double epsilon = 1e-8;  // added inside the square root

  void validate() const;
};

// SGD:     theta <- theta - lr * g
// RMSProp: a <- rho * a + (1 - rho) * g^2;  theta <- theta - lr * g / sqrt(a + eps)
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig config = {});

  const OptimizerConfig& config() const { return config_; }
  const Params& accumulators() const { return accumulators_; }

  // Gradients are matched to parameters by name. All gradients are checked
  // for finiteness before any parameter is touched.
  void step(Params& params, const Params& grads);

 private:
  OptimizerConfig config_;
  Params accumulators_;
};

}  // namespace gin::nn
