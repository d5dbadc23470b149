#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gin/nn/tensor.hpp"

namespace gin::nn {

enum class ParamRole { weight, bias, scale, shift, running_mean, running_var };

std::string_view to_string(ParamRole role);

// Running statistics are state, not parameters: no gradients, no clipping.
inline bool is_trainable(ParamRole role) {
  return role != ParamRole::running_mean && role != ParamRole::running_var;
}

template <typename T>
struct Param {
  std::string name;
  ParamRole role = ParamRole::weight;
  std::size_t layer = 0;
  BasicTensor<T> value;

  bool operator==(const Param&) const = default;
};

// Ordered, uniquely named collection of tensors, used both for network
// parameters and for gradients (which hold only the trainable entries).
template <typename T>
class BasicParams {
 public:
  void add(Param<T> p);

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  Param<T>& operator[](std::size_t i) { return entries_[i]; }
  const Param<T>& operator[](std::size_t i) const { return entries_[i]; }

  const Param<T>* find(std::string_view name) const;
  Param<T>* find(std::string_view name);
  const Param<T>& at(std::string_view name) const;
  Param<T>& at(std::string_view name);

  // Number of scalar values over trainable entries.
  std::size_t trainable_count() const;

  template <typename U>
  BasicParams<U> cast() const {
    BasicParams<U> out;
    for (const auto& p : entries_) out.add({p.name, p.role, p.layer, p.value.template cast<U>()});
    return out;
  }

  bool operator==(const BasicParams&) const = default;

 private:
  std::vector<Param<T>> entries_;
};

using Params = BasicParams<float>;

// Clamp every trainable value into [-c, c]; running statistics are untouched.
template <typename T>
void clip_params(BasicParams<T>& params, T c);

// FNV-1a over names, shapes and raw value bytes.
std::uint64_t fingerprint(const Params& params);

}  // namespace gin::nn
