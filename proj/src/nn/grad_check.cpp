#include "gin/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace gin::nn {

namespace {

using DNet = BasicNetwork<double>;
using DTensor = BasicTensor<double>;

double projected_loss(DNet& net, const DTensor& input, const DTensor& weights) {
  const DTensor y = net.forward(input, Mode::train);
  double loss = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) loss += weights[k] * y[k];
  return loss;
}

}  // namespace

GradCheckResult grad_check(const Network& net, const Tensor& input, double eps) {
  GradCheckResult result;
  if (net.parameter_count() == 0) return result;
  DNet dnet = net.cast<double>();
  DTensor dinput = input.cast<double>();

  Rng rng(0x5EEDF00DULL);
  DTensor weights(dnet.forward(dinput, Mode::train).shape());
  for (double& w : weights.data()) w = rng.uniform(-1.0, 1.0);

  // Train-mode forwards update running statistics, which the train-mode loss
  // never reads; the snapshot keeps the perturbation loop free of that drift.
  const BasicParams<double> snapshot = dnet.params();
  dnet.forward(dinput, Mode::train);
  const BasicGradients<double> analytic = dnet.backward(dinput, weights);

  auto record = [&](const std::string& name, double a, double n) {
    const double err = std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-6});
    ++result.checked;
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst = name;
    }
  };

  for (const auto& g : analytic.params) {
    auto& value = dnet.params().at(g.name).value;
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double original = value[k];
      value[k] = original + eps;
      const double up = projected_loss(dnet, dinput, weights);
      value[k] = original - eps;
      const double down = projected_loss(dnet, dinput, weights);
      value[k] = original;
      dnet.params() = snapshot;
      record(g.name, g.value[k], (up - down) / (2.0 * eps));
    }
  }

  for (std::size_t k = 0; k < dinput.size(); ++k) {
    const double original = dinput[k];
    dinput[k] = original + eps;
    const double up = projected_loss(dnet, dinput, weights);
    dinput[k] = original - eps;
    const double down = projected_loss(dnet, dinput, weights);
    dinput[k] = original;
    dnet.params() = snapshot;
    record("input", analytic.input[k], (up - down) / (2.0 * eps));
  }
  return result;
}

}  // namespace gin::nn
