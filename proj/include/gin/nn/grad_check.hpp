#pragma once

#include "gin/nn/network.hpp"

namespace gin::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst;  // parameter name (or "input") holding the worst entry
  std::size_t checked = 0;
};

// Compares backward() against central finite differences of the scalar loss
// L = sum_k w_k * y_k, with fixed pseudo-random projection weights w. Every
// trainable parameter entry and every input entry is checked; the relative
// error uses the denominator max(|analytic|, |numeric|, 1e-6).
//
// Both sides run on a double-precision copy of the network so that the
// comparison measures the backward algorithm rather than float32 rounding of
// the finite difference. The network passed in is not modified.
GradCheckResult grad_check(const Network& net, const Tensor& input, double eps);

}  // namespace gin::nn
