#include "gin/nn/optimizer.hpp"

#include <cmath>

namespace gin::nn {

void OptimizerConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning rate must be positive");
  if (algorithm == Algorithm::rmsprop) {
    if (!(decay > 0.0 && decay < 1.0)) throw ValidationError("RMSProp decay must lie in (0, 1)");
    if (!(epsilon > 0.0)) throw ValidationError("RMSProp epsilon must be positive");
  }
}

Optimizer::Optimizer(OptimizerConfig config) : config_(config) { config_.validate(); }

void Optimizer::step(Params& params, const Params& grads) {
  for (const auto& g : grads) {
    const auto& p = params.at(g.name);
    if (p.value.shape() != g.value.shape()) {
      throw ShapeError("gradient for '" + g.name + "' has shape " + shape_string(g.value.shape()) +
                       ", parameter has " + shape_string(p.value.shape()));
    }
    if (!g.value.all_finite()) throw NumericalError("non-finite gradient for parameter '" + g.name + "'");
  }

  const double lr = config_.learning_rate;
  for (const auto& g : grads) {
    auto& theta = params.at(g.name).value;
    const std::size_t n = theta.size();
    float* __restrict th = theta.raw();
    const float* __restrict gr = g.value.raw();
    if (config_.algorithm == Algorithm::sgd) {
      for (std::size_t k = 0; k < n; ++k) th[k] = static_cast<float>(th[k] - lr * gr[k]);
      continue;
    }
    Param<float>* acc = accumulators_.find(g.name);
    if (!acc) {
      accumulators_.add({g.name, g.role, g.layer, Tensor(g.value.shape())});
      acc = accumulators_.find(g.name);
    }
    float* __restrict ac = acc->value.raw();
    const double rho = config_.decay, eps = config_.epsilon;
    for (std::size_t k = 0; k < n; ++k) {
      const double gk = gr[k];
      const double a = rho * ac[k] + (1.0 - rho) * gk * gk;
      ac[k] = static_cast<float>(a);
      th[k] = static_cast<float>(th[k] - lr * gk / std::sqrt(a + eps));
    }
  }
}

}  // namespace gin::nn
