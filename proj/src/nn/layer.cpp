#include "gin/nn/layer.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>

namespace gin::nn {

std::string_view to_string(LayerKind kind) {
  switch (kind) {
    case LayerKind::dense: return "dense";
    case LayerKind::conv2d: return "conv2d";
    case LayerKind::leaky_relu: return "leaky_relu";
    case LayerKind::relu: return "relu";
    case LayerKind::sigmoid: return "sigmoid";
    case LayerKind::tanh: return "tanh";
    case LayerKind::batch_norm: return "batch_norm";
    case LayerKind::flatten: return "flatten";
  }
  return "unknown";
}

LayerSpec LayerSpec::dense(std::size_t in, std::size_t out) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.in = in;
  s.out = out;
  return s;
}

LayerSpec LayerSpec::conv2d(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                            std::size_t stride, std::size_t padding) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.in = in_channels;
  s.out = out_channels;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  return s;
}

LayerSpec LayerSpec::leaky_relu(float slope) {
  LayerSpec s;
  s.kind = LayerKind::leaky_relu;
  s.negative_slope = slope;
  return s;
}

LayerSpec LayerSpec::relu() {
  LayerSpec s;
  s.kind = LayerKind::relu;
  return s;
}

LayerSpec LayerSpec::sigmoid() {
  LayerSpec s;
  s.kind = LayerKind::sigmoid;
  return s;
}

LayerSpec LayerSpec::tanh() {
  LayerSpec s;
  s.kind = LayerKind::tanh;
  return s;
}

LayerSpec LayerSpec::batch_norm(std::size_t features, float epsilon, float momentum) {
  LayerSpec s;
  s.kind = LayerKind::batch_norm;
  s.in = features;
  s.epsilon = epsilon;
  s.momentum = momentum;
  return s;
}

LayerSpec LayerSpec::flatten() {
  LayerSpec s;
  s.kind = LayerKind::flatten;
  return s;
}

void LayerSpec::validate() const {
  const std::string name(to_string(kind));
  switch (kind) {
    case LayerKind::dense:
      if (in == 0 || out == 0) throw ValidationError(name + ": fan-in and fan-out must be positive");
      break;
    case LayerKind::conv2d:
      if (in == 0 || out == 0) throw ValidationError(name + ": channel counts must be positive");
      if (kernel < 1 || stride < 1) throw ValidationError(name + ": kernel size and stride must be >= 1");
      break;
    case LayerKind::leaky_relu:
      if (!(negative_slope > 0.0f && negative_slope < 1.0f)) {
        throw ValidationError(name + ": negative slope must lie in (0, 1)");
      }
      break;
    case LayerKind::batch_norm:
      if (in == 0) throw ValidationError(name + ": feature count must be positive");
      if (!(epsilon > 0.0f)) throw ValidationError(name + ": epsilon must be positive");
      if (!(momentum >= 0.0f && momentum < 1.0f)) throw ValidationError(name + ": momentum must lie in [0, 1)");
      break;
    default:
      break;
  }
}

Shape LayerSpec::output_shape(const Shape& sample_in) const {
  auto fail = [&](const std::string& expected) {
    throw ShapeError(describe() + ": expected per-sample input " + expected + ", got " +
                     shape_string(sample_in));
  };
  switch (kind) {
    case LayerKind::dense:
      if (sample_in.size() != 1 || sample_in[0] != in) fail("(" + std::to_string(in) + ")");
      return {out};
    case LayerKind::conv2d: {
      if (sample_in.size() != 3 || sample_in[0] != in) fail("(" + std::to_string(in) + ", H, W)");
      if (sample_in[1] + 2 * padding < kernel || sample_in[2] + 2 * padding < kernel) {
        fail("spatial size >= kernel - 2*padding");
      }
      const std::size_t ho = (sample_in[1] + 2 * padding - kernel) / stride + 1;
      const std::size_t wo = (sample_in[2] + 2 * padding - kernel) / stride + 1;
      return {out, ho, wo};
    }
    case LayerKind::batch_norm:
      if (sample_in.empty() || sample_in[0] != in) fail("(" + std::to_string(in) + ", ...)");
      return sample_in;
    case LayerKind::flatten:
      return {shape_size(sample_in)};
    default:
      return sample_in;
  }
}

namespace {

std::string format_float(float v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string LayerSpec::describe() const {
  const std::string name(to_string(kind));
  switch (kind) {
    case LayerKind::dense:
      return name + "(" + std::to_string(in) + "," + std::to_string(out) + ")";
    case LayerKind::conv2d:
      return name + "(" + std::to_string(in) + "," + std::to_string(out) + ",k" + std::to_string(kernel) + ",s" +
             std::to_string(stride) + ",p" + std::to_string(padding) + ")";
    case LayerKind::leaky_relu:
      return name + "(" + format_float(negative_slope) + ")";
    case LayerKind::batch_norm:
      return name + "(" + std::to_string(in) + ",e" + format_float(epsilon) + ",m" + format_float(momentum) + ")";
    default:
      return name;
  }
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      break;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
  return parts;
}

template <typename V>
V parse_number(std::string_view s, std::string_view context) {
  V v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw FormatError("malformed number '" + std::string(s) + "' in layer '" + std::string(context) + "'");
  }
  return v;
}

}  // namespace

LayerSpec LayerSpec::parse(std::string_view text) {
  const std::size_t open = text.find('(');
  const std::string_view name = text.substr(0, open);
  std::vector<std::string_view> args;
  if (open != std::string_view::npos) {
    if (text.back() != ')') throw FormatError("malformed layer '" + std::string(text) + "'");
    args = split(text.substr(open + 1, text.size() - open - 2), ',');
  }
  auto arg = [&](std::size_t i, std::string_view prefix) {
    if (i >= args.size() || !args[i].starts_with(prefix)) {
      throw FormatError("malformed layer '" + std::string(text) + "'");
    }
    return args[i].substr(prefix.size());
  };

  LayerSpec s;
  if (name == "dense") {
    s = dense(parse_number<std::size_t>(arg(0, ""), text), parse_number<std::size_t>(arg(1, ""), text));
  } else if (name == "conv2d") {
    s = conv2d(parse_number<std::size_t>(arg(0, ""), text), parse_number<std::size_t>(arg(1, ""), text),
               parse_number<std::size_t>(arg(2, "k"), text), parse_number<std::size_t>(arg(3, "s"), text),
               parse_number<std::size_t>(arg(4, "p"), text));
  } else if (name == "leaky_relu") {
    s = leaky_relu(parse_number<float>(arg(0, ""), text));
  } else if (name == "relu") {
    s = relu();
  } else if (name == "sigmoid") {
    s = sigmoid();
  } else if (name == "tanh") {
    s = tanh();
  } else if (name == "batch_norm") {
    s = batch_norm(parse_number<std::size_t>(arg(0, ""), text), parse_number<float>(arg(1, "e"), text),
                   parse_number<float>(arg(2, "m"), text));
  } else if (name == "flatten") {
    s = flatten();
  } else {
    throw FormatError("unknown layer kind '" + std::string(name) + "'");
  }
  s.validate();
  return s;
}

std::string describe_layers(const std::vector<LayerSpec>& layers) {
  std::string out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) out += ' ';
    out += layers[i].describe();
  }
  return out;
}

std::vector<LayerSpec> parse_layers(std::string_view text) {
  std::vector<LayerSpec> layers;
  if (text.empty()) return layers;
  for (std::string_view part : split(text, ' ')) layers.push_back(LayerSpec::parse(part));
  return layers;
}

}  // namespace gin::nn
