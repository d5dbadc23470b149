#pragma once

#include <cstddef>

// Hot loops of the network engine. Two implementations with identical
// signatures live side by side:
//   gin::nn::kernels    blocked and OpenMP-parallel, used by the layers
//   gin::nn::reference  naive serial loops, kept for tests and benchmarks
//
// Every output element of gemm is produced by exactly one thread, summing
// products in double with k ascending, so the parallel kernel is bit-identical
// to the reference for any thread count (float*float is exact in double).
namespace gin::nn {

struct ConvGeometry {
  std::size_t batch = 1;
  std::size_t channels = 1;
  std::size_t height = 1;
  std::size_t width = 1;
  std::size_t kernel = 1;
  std::size_t stride = 1;
  std::size_t padding = 0;

  std::size_t out_height() const { return (height + 2 * padding - kernel) / stride + 1; }
  std::size_t out_width() const { return (width + 2 * padding - kernel) / stride + 1; }
  std::size_t patch_size() const { return channels * kernel * kernel; }
  std::size_t positions() const { return out_height() * out_width(); }
};

namespace kernels {

// C (M x N) = op(A) * B, where op(A) is M x K; A is stored K x M when trans_a.
template <typename T>
void gemm(bool trans_a, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);

template <typename T>
void transpose(std::size_t rows, std::size_t cols, const T* in, T* out);

// (N, C, H, W) -> (C*k*k, N*Ho*Wo), column index = sample * Ho*Wo + position.
template <typename T>
void im2col(const ConvGeometry& g, const T* input, T* cols);

// Adjoint of im2col; overwrites `input_grad`.
template <typename T>
void col2im(const ConvGeometry& g, const T* cols, T* input_grad);

}  // namespace kernels

namespace reference {

template <typename T>
void gemm(bool trans_a, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c);

template <typename T>
void im2col(const ConvGeometry& g, const T* input, T* cols);

template <typename T>
void col2im(const ConvGeometry& g, const T* cols, T* input_grad);

}  // namespace reference

}  // namespace gin::nn
