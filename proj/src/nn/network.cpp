#include "gin/nn/network.hpp"

#include <cmath>
#include <cstring>

#include "gin/nn/kernels.hpp"

namespace gin::nn {

namespace {

Shape with_batch(std::size_t batch, const Shape& sample) {
  Shape s{batch};
  s.insert(s.end(), sample.begin(), sample.end());
  return s;
}

ConvGeometry geometry(const LayerSpec& spec, std::size_t batch, const Shape& sample_in) {
  ConvGeometry g;
  g.batch = batch;
  g.channels = sample_in[0];
  g.height = sample_in[1];
  g.width = sample_in[2];
  g.kernel = spec.kernel;
  g.stride = spec.stride;
  g.padding = spec.padding;
  return g;
}

template <typename T>
T sigmoid(T x) {
  if (x >= T{0}) return T{1} / (T{1} + std::exp(-x));
  const T e = std::exp(x);
  return e / (T{1} + e);
}

}  // namespace

template <typename T>
BasicNetwork<T>::BasicNetwork(std::vector<LayerSpec> layers, Shape sample_shape) : layers_(std::move(layers)) {
  shapes_.push_back(std::move(sample_shape));
  param_index_.resize(layers_.size());
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& spec = layers_[i];
    spec.validate();
    shapes_.push_back(spec.output_shape(shapes_.back()));
    const std::string prefix = std::to_string(i) + ".";
    auto add = [&](const char* name, ParamRole role, Shape shape, T fill) {
      param_index_[i].push_back(params_.size());
      params_.add({prefix + name, role, i, BasicTensor<T>(std::move(shape), fill)});
    };
    switch (spec.kind) {
      case LayerKind::dense:
        add("weight", ParamRole::weight, {spec.in, spec.out}, T{0});
        add("bias", ParamRole::bias, {spec.out}, T{0});
        break;
      case LayerKind::conv2d:
        add("weight", ParamRole::weight, {spec.out, spec.in, spec.kernel, spec.kernel}, T{0});
        add("bias", ParamRole::bias, {spec.out}, T{0});
        break;
      case LayerKind::batch_norm:
        add("scale", ParamRole::scale, {spec.in}, T{1});
        add("shift", ParamRole::shift, {spec.in}, T{0});
        add("running_mean", ParamRole::running_mean, {spec.in}, T{0});
        add("running_var", ParamRole::running_var, {spec.in}, T{1});
        break;
      default:
        break;
    }
  }
}

template <typename T>
void BasicNetwork<T>::initialize(Rng& rng) {
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& spec = layers_[i];
    double fan_in = 0, fan_out = 0;
    if (spec.kind == LayerKind::dense) {
      fan_in = static_cast<double>(spec.in);
      fan_out = static_cast<double>(spec.out);
    } else if (spec.kind == LayerKind::conv2d) {
      const double area = static_cast<double>(spec.kernel * spec.kernel);
      fan_in = static_cast<double>(spec.in) * area;
      fan_out = static_cast<double>(spec.out) * area;
    }
    for (std::size_t idx : param_index_[i]) {
      auto& p = params_[idx];
      switch (p.role) {
        case ParamRole::weight: {
          const double limit = std::sqrt(6.0 / (fan_in + fan_out));
          for (T& v : p.value.data()) v = static_cast<T>(rng.uniform(-limit, limit));
          break;
        }
        case ParamRole::scale:
        case ParamRole::running_var:
          p.value.fill(T{1});
          break;
        default:
          p.value.fill(T{0});
          break;
      }
    }
  }
  cache_ = {};
}

template <typename T>
void BasicNetwork<T>::check_input(const TensorT& input) const {
  const Shape& expected = shapes_.front();
  bool ok = input.rank() == expected.size() + 1;
  for (std::size_t d = 0; ok && d < expected.size(); ++d) ok = input.dim(d + 1) == expected[d];
  if (!ok) {
    const std::string first = layers_.empty() ? std::string("network input") : "layer 0 (" + layers_[0].describe() + ")";
    throw ShapeError(first + ": expected input (N, " + shape_string(expected).substr(1) + ", got " +
                     shape_string(input.shape()));
  }
}

template <typename T>
typename BasicNetwork<T>::TensorT BasicNetwork<T>::forward(const TensorT& input, Mode mode) {
  if (mode == Mode::eval) return infer(input);
  Cache next;
  TensorT out = run(input, &next);
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].kind != LayerKind::batch_norm) continue;
    auto& running_mean = params_[param_index_[i][2]].value;
    auto& running_var = params_[param_index_[i][3]].value;
    const double m = layers_[i].momentum;
    for (std::size_t c = 0; c < layers_[i].in; ++c) {
      running_mean[c] = static_cast<T>(m * running_mean[c] + (1.0 - m) * next.batch_mean[i][c]);
      running_var[c] = static_cast<T>(m * running_var[c] + (1.0 - m) * next.batch_var[i][c]);
    }
  }
  cache_ = std::move(next);
  return out;
}

template <typename T>
typename BasicNetwork<T>::TensorT BasicNetwork<T>::infer(const TensorT& input) const {
  return run(input, nullptr);
}

template <typename T>
typename BasicNetwork<T>::TensorT BasicNetwork<T>::run(const TensorT& input, Cache* cache) const {
  check_input(input);
  const std::size_t batch = input.dim(0);
  const bool train = cache != nullptr;

  Cache unused;
  Cache& next = train ? *cache : unused;
  if (train) {
    next.activations.reserve(layers_.size() + 1);
    next.aux.resize(layers_.size());
    next.inv_std.resize(layers_.size());
    next.batch_mean.resize(layers_.size());
    next.batch_var.resize(layers_.size());
  }

  TensorT x = input;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& spec = layers_[i];
    TensorT y(with_batch(batch, shapes_[i + 1]));
    const auto xs = x.data();
    auto ys = y.data();

    switch (spec.kind) {
      case LayerKind::dense: {
        const auto& w = params_[param_index_[i][0]].value;
        const auto& b = params_[param_index_[i][1]].value;
        kernels::gemm(false, batch, spec.out, spec.in, x.raw(), w.raw(), y.raw());
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t o = 0; o < spec.out; ++o) ys[n * spec.out + o] += b[o];
        }
        break;
      }
      case LayerKind::conv2d: {
        const auto& w = params_[param_index_[i][0]].value;
        const auto& b = params_[param_index_[i][1]].value;
        const ConvGeometry g = geometry(spec, batch, shapes_[i]);
        const std::size_t positions = g.positions();
        TensorT cols({g.patch_size(), batch * positions});
        kernels::im2col(g, x.raw(), cols.raw());
        std::vector<T> out(spec.out * batch * positions);
        kernels::gemm(false, spec.out, batch * positions, g.patch_size(), w.raw(), cols.raw(), out.data());
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t c = 0; c < spec.out; ++c) {
            const T* src = out.data() + c * batch * positions + n * positions;
            T* dst = y.raw() + (n * spec.out + c) * positions;
            for (std::size_t p = 0; p < positions; ++p) dst[p] = src[p] + b[c];
          }
        }
        if (train) next.aux[i] = std::move(cols);
        break;
      }
      case LayerKind::leaky_relu: {
        const T slope = static_cast<T>(spec.negative_slope);
        for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = xs[k] >= T{0} ? xs[k] : slope * xs[k];
        break;
      }
      case LayerKind::relu:
        for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = xs[k] < T{0} ? T{0} : xs[k];  // NaN passes through
        break;
      case LayerKind::sigmoid:
        for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = sigmoid(xs[k]);
        break;
      case LayerKind::tanh:
        for (std::size_t k = 0; k < xs.size(); ++k) ys[k] = std::tanh(xs[k]);
        break;
      case LayerKind::batch_norm: {
        const auto& scale = params_[param_index_[i][0]].value;
        const auto& shift = params_[param_index_[i][1]].value;
        const auto& running_mean = params_[param_index_[i][2]].value;
        const auto& running_var = params_[param_index_[i][3]].value;
        const std::size_t channels = spec.in;
        const std::size_t spatial = shape_size(shapes_[i]) / channels;
        const double count = static_cast<double>(batch * spatial);
        TensorT normalized;
        if (train) normalized = TensorT(x.shape());
        std::vector<double> inv_stds(channels), means(channels), vars(channels);
        for (std::size_t c = 0; c < channels; ++c) {
          double mean, var;
          if (train) {
            double sum = 0.0;
            for (std::size_t n = 0; n < batch; ++n) {
              const T* px = x.raw() + (n * channels + c) * spatial;
              for (std::size_t s = 0; s < spatial; ++s) sum += px[s];
            }
            mean = sum / count;
            double sq = 0.0;
            for (std::size_t n = 0; n < batch; ++n) {
              const T* px = x.raw() + (n * channels + c) * spatial;
              for (std::size_t s = 0; s < spatial; ++s) sq += (px[s] - mean) * (px[s] - mean);
            }
            var = sq / count;
          } else {
            mean = running_mean[c];
            var = running_var[c];
          }
          const double inv_std = 1.0 / std::sqrt(var + static_cast<double>(spec.epsilon));
          inv_stds[c] = inv_std;
          means[c] = mean;
          vars[c] = var;
          for (std::size_t n = 0; n < batch; ++n) {
            const std::size_t base = (n * channels + c) * spatial;
            for (std::size_t s = 0; s < spatial; ++s) {
              const T xhat = static_cast<T>((xs[base + s] - mean) * inv_std);
              if (train) normalized[base + s] = xhat;
              ys[base + s] = scale[c] * xhat + shift[c];
            }
          }
        }
        if (train) {
          next.aux[i] = std::move(normalized);
          next.inv_std[i] = std::move(inv_stds);
          next.batch_mean[i] = std::move(means);
          next.batch_var[i] = std::move(vars);
        }
        break;
      }
      case LayerKind::flatten:
        y = x.reshaped(y.shape());
        break;
    }

    if (train) next.activations.push_back(std::move(x));
    x = std::move(y);
  }

  if (train) {
    next.activations.push_back(x);
    next.valid = true;
  }
  return x;
}

template <typename T>
BasicGradients<T> BasicNetwork<T>::backward(const TensorT& input, const TensorT& output_grad, GradRequest request) {
  // Bitwise, so a cached input holding NaN still matches itself.
  const auto& cached = cache_.activations.front();
  if (!cache_.valid || cached.shape() != input.shape() ||
      std::memcmp(cached.raw(), input.raw(), input.size() * sizeof(T)) != 0) {
    throw ValidationError("backward() requires a preceding train-mode forward() on the same input");
  }
  if (output_grad.shape() != cache_.activations.back().shape()) {
    throw ShapeError("output gradient shape " + shape_string(output_grad.shape()) + " does not match output " +
                     shape_string(cache_.activations.back().shape()));
  }
  const std::size_t batch = input.dim(0);

  BasicGradients<T> result;
  std::vector<std::size_t> grad_slot(params_.size(), SIZE_MAX);
  for (std::size_t k = 0; k < params_.size(); ++k) {
    const auto& p = params_[k];
    if (!is_trainable(p.role)) continue;
    grad_slot[k] = result.params.size();
    result.params.add({p.name, p.role, p.layer, TensorT(p.value.shape())});
  }
  auto grad_of = [&](std::size_t layer, std::size_t which) -> TensorT& {
    return result.params[grad_slot[param_index_[layer][which]]].value;
  };

  TensorT g = output_grad;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const LayerSpec& spec = layers_[i];
    const TensorT& x = cache_.activations[i];
    const TensorT& y = cache_.activations[i + 1];
    const bool need_dx = i > 0 || request.input;
    TensorT dx;
    if (need_dx) dx = TensorT(x.shape());
    const auto gs = g.data();

    switch (spec.kind) {
      case LayerKind::dense: {
        const auto& w = params_[param_index_[i][0]].value;
        if (request.params) {
          auto& dw = grad_of(i, 0);
          auto& db = grad_of(i, 1);
          kernels::gemm(true, spec.in, spec.out, batch, x.raw(), g.raw(), dw.raw());
          for (std::size_t o = 0; o < spec.out; ++o) {
            double s = 0.0;
            for (std::size_t n = 0; n < batch; ++n) s += gs[n * spec.out + o];
            db[o] = static_cast<T>(s);
          }
        }
        if (need_dx) {
          std::vector<T> wt(spec.in * spec.out);
          kernels::transpose(spec.in, spec.out, w.raw(), wt.data());
          kernels::gemm(false, batch, spec.in, spec.out, g.raw(), wt.data(), dx.raw());
        }
        break;
      }
      case LayerKind::conv2d: {
        const auto& w = params_[param_index_[i][0]].value;
        const ConvGeometry geo = geometry(spec, batch, shapes_[i]);
        const std::size_t positions = geo.positions();
        const std::size_t cols_n = batch * positions;
        std::vector<T> gperm(spec.out * cols_n);
        for (std::size_t n = 0; n < batch; ++n) {
          for (std::size_t c = 0; c < spec.out; ++c) {
            const T* src = g.raw() + (n * spec.out + c) * positions;
            std::copy(src, src + positions, gperm.data() + c * cols_n + n * positions);
          }
        }
        if (request.params) {
          const TensorT& cols = cache_.aux[i];
          std::vector<T> cols_t(cols.size());
          kernels::transpose(geo.patch_size(), cols_n, cols.raw(), cols_t.data());
          auto& dw = grad_of(i, 0);
          auto& db = grad_of(i, 1);
          kernels::gemm(false, spec.out, geo.patch_size(), cols_n, gperm.data(), cols_t.data(), dw.raw());
          for (std::size_t c = 0; c < spec.out; ++c) {
            double s = 0.0;
            for (std::size_t k = 0; k < cols_n; ++k) s += gperm[c * cols_n + k];
            db[c] = static_cast<T>(s);
          }
        }
        if (need_dx) {
          std::vector<T> dcols(geo.patch_size() * cols_n);
          kernels::gemm(true, geo.patch_size(), cols_n, spec.out, w.raw(), gperm.data(), dcols.data());
          kernels::col2im(geo, dcols.data(), dx.raw());
        }
        break;
      }
      case LayerKind::leaky_relu: {
        if (!need_dx) break;
        const T slope = static_cast<T>(spec.negative_slope);
        const auto xs = x.data();
        // Subgradient at exactly zero is the positive-branch slope.
        for (std::size_t k = 0; k < gs.size(); ++k) dx[k] = xs[k] >= T{0} ? gs[k] : slope * gs[k];
        break;
      }
      case LayerKind::relu: {
        if (!need_dx) break;
        const auto xs = x.data();
        for (std::size_t k = 0; k < gs.size(); ++k) dx[k] = xs[k] >= T{0} ? gs[k] : T{0};
        break;
      }
      case LayerKind::sigmoid: {
        if (!need_dx) break;
        const auto ys = y.data();
        for (std::size_t k = 0; k < gs.size(); ++k) dx[k] = gs[k] * ys[k] * (T{1} - ys[k]);
        break;
      }
      case LayerKind::tanh: {
        if (!need_dx) break;
        const auto ys = y.data();
        for (std::size_t k = 0; k < gs.size(); ++k) dx[k] = gs[k] * (T{1} - ys[k] * ys[k]);
        break;
      }
      case LayerKind::batch_norm: {
        const auto& scale = params_[param_index_[i][0]].value;
        const TensorT& xhat = cache_.aux[i];
        const std::vector<double>& inv_std = cache_.inv_std[i];
        const std::size_t channels = spec.in;
        const std::size_t spatial = shape_size(shapes_[i]) / channels;
        const double count = static_cast<double>(batch * spatial);
        for (std::size_t c = 0; c < channels; ++c) {
          double sum_g = 0.0, sum_gx = 0.0;
          for (std::size_t n = 0; n < batch; ++n) {
            const std::size_t base = (n * channels + c) * spatial;
            for (std::size_t s = 0; s < spatial; ++s) {
              sum_g += gs[base + s];
              sum_gx += static_cast<double>(gs[base + s]) * xhat[base + s];
            }
          }
          if (request.params) {
            grad_of(i, 0)[c] = static_cast<T>(sum_gx);
            grad_of(i, 1)[c] = static_cast<T>(sum_g);
          }
          if (need_dx) {
            const double k = static_cast<double>(scale[c]) * inv_std[c] / count;
            for (std::size_t n = 0; n < batch; ++n) {
              const std::size_t base = (n * channels + c) * spatial;
              for (std::size_t s = 0; s < spatial; ++s) {
                dx[base + s] = static_cast<T>(k * (count * gs[base + s] - sum_g - xhat[base + s] * sum_gx));
              }
            }
          }
        }
        break;
      }
      case LayerKind::flatten:
        if (need_dx) dx = g.reshaped(x.shape());
        break;
    }
    g = std::move(dx);
  }

  if (request.input) result.input = std::move(g);
  return result;
}

template class BasicNetwork<float>;
template class BasicNetwork<double>;

}  // namespace gin::nn
