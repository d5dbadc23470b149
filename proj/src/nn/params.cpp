#include "gin/nn/params.hpp"

#include <algorithm>
#include <cstring>

namespace gin::nn {

std::string_view to_string(ParamRole role) {
  switch (role) {
    case ParamRole::weight: return "weight";
    case ParamRole::bias: return "bias";
    case ParamRole::scale: return "scale";
    case ParamRole::shift: return "shift";
    case ParamRole::running_mean: return "running_mean";
    case ParamRole::running_var: return "running_var";
  }
  return "unknown";
}

template <typename T>
void BasicParams<T>::add(Param<T> p) {
  if (find(p.name)) throw ValidationError("duplicate parameter name '" + p.name + "'");
  entries_.push_back(std::move(p));
}

template <typename T>
const Param<T>* BasicParams<T>::find(std::string_view name) const {
  for (const auto& p : entries_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

template <typename T>
Param<T>* BasicParams<T>::find(std::string_view name) {
  for (auto& p : entries_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

template <typename T>
const Param<T>& BasicParams<T>::at(std::string_view name) const {
  if (const auto* p = find(name)) return *p;
  throw ValidationError("no parameter named '" + std::string(name) + "'");
}

template <typename T>
Param<T>& BasicParams<T>::at(std::string_view name) {
  if (auto* p = find(name)) return *p;
  throw ValidationError("no parameter named '" + std::string(name) + "'");
}

template <typename T>
std::size_t BasicParams<T>::trainable_count() const {
  std::size_t n = 0;
  for (const auto& p : entries_) {
    if (is_trainable(p.role)) n += p.value.size();
  }
  return n;
}

template <typename T>
void clip_params(BasicParams<T>& params, T c) {
  if (!(c > T{0})) throw ValidationError("clip constant must be positive");
  for (auto& p : params) {
    if (!is_trainable(p.role)) continue;
    for (T& v : p.value.data()) v = std::clamp(v, -c, c);
  }
}

std::uint64_t fingerprint(const Params& params) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const void* data, std::size_t n) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& p : params) {
    mix(p.name.data(), p.name.size());
    for (std::size_t d : p.value.shape()) mix(&d, sizeof d);
    mix(p.value.raw(), p.value.size() * sizeof(float));
  }
  return h;
}

template class BasicParams<float>;
template class BasicParams<double>;
template void clip_params<float>(BasicParams<float>&, float);
template void clip_params<double>(BasicParams<double>&, double);

}  // namespace gin::nn
