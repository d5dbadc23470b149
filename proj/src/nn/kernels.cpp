#include "gin/nn/kernels.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <type_traits>

namespace gin::nn {

namespace {

constexpr std::size_t kMicroRows = 4;
constexpr std::size_t kMicroCols = 32;
// Below this many multiply-adds the OpenMP fork costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 16;

template <typename T>
void im2col_sample(const ConvGeometry& g, std::size_t n, const T* input, T* cols) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  const std::size_t positions = ho * wo;
  const std::size_t row_stride = g.batch * positions;
  const T* x = input + n * g.channels * g.height * g.width;
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        T* dst = cols + ((c * g.kernel + ky) * g.kernel + kx) * row_stride + n * positions;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.padding);
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.padding);
            const bool inside = iy >= 0 && ix >= 0 && iy < static_cast<std::ptrdiff_t>(g.height) &&
                                ix < static_cast<std::ptrdiff_t>(g.width);
            dst[oy * wo + ox] = inside ? x[(c * g.height + iy) * g.width + ix] : T{0};
          }
        }
      }
    }
  }
}

template <typename T>
void col2im_sample(const ConvGeometry& g, std::size_t n, const T* cols, T* input_grad) {
  const std::size_t ho = g.out_height(), wo = g.out_width();
  const std::size_t positions = ho * wo;
  const std::size_t row_stride = g.batch * positions;
  T* dx = input_grad + n * g.channels * g.height * g.width;
  std::fill(dx, dx + g.channels * g.height * g.width, T{0});
  for (std::size_t c = 0; c < g.channels; ++c) {
    for (std::size_t ky = 0; ky < g.kernel; ++ky) {
      for (std::size_t kx = 0; kx < g.kernel; ++kx) {
        const T* src = cols + ((c * g.kernel + ky) * g.kernel + kx) * row_stride + n * positions;
        for (std::size_t oy = 0; oy < ho; ++oy) {
          const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                    static_cast<std::ptrdiff_t>(g.padding);
          if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.height)) continue;
          for (std::size_t ox = 0; ox < wo; ++ox) {
            const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                      static_cast<std::ptrdiff_t>(g.padding);
            if (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.width)) continue;
            dx[(c * g.height + iy) * g.width + ix] += src[oy * wo + ox];
          }
        }
      }
    }
  }
}

using v8d = double __attribute__((vector_size(64)));
using v8f = float __attribute__((vector_size(32)));

template <typename T>
inline v8d load8(const T* p) {
  if constexpr (std::is_same_v<T, float>) {
    v8f f;
    std::memcpy(&f, p, sizeof f);
    return __builtin_convertvector(f, v8d);
  } else {
    v8d d;
    std::memcpy(&d, p, sizeof d);
    return d;
  }
}

// Full 4 x 32 tile: sixteen 8-wide accumulators stay in registers across the
// whole k loop. Lane-wise multiply-add keeps the per-element summation order.
// Element (r, kk) of op(A) is a0[r * row_step + kk * k_step].
template <typename T>
void gemm_tile_full(const T* a0, std::size_t row_step, std::size_t k_step, std::size_t n, std::size_t k,
                    const T* b, T* c, std::size_t j0) {
  v8d c00{}, c01{}, c02{}, c03{}, c10{}, c11{}, c12{}, c13{};
  v8d c20{}, c21{}, c22{}, c23{}, c30{}, c31{}, c32{}, c33{};
  const T* a1 = a0 + row_step;
  const T* a2 = a1 + row_step;
  const T* a3 = a2 + row_step;
  const T* brow = b + j0;
  for (std::size_t kk = 0; kk < k; ++kk, brow += n) {
    const v8d b0 = load8(brow), b1 = load8(brow + 8), b2 = load8(brow + 16), b3 = load8(brow + 24);
    const std::size_t off = kk * k_step;
    const double x0 = a0[off], x1 = a1[off], x2 = a2[off], x3 = a3[off];
    c00 += x0 * b0; c01 += x0 * b1; c02 += x0 * b2; c03 += x0 * b3;
    c10 += x1 * b0; c11 += x1 * b1; c12 += x1 * b2; c13 += x1 * b3;
    c20 += x2 * b0; c21 += x2 * b1; c22 += x2 * b2; c23 += x2 * b3;
    c30 += x3 * b0; c31 += x3 * b1; c32 += x3 * b2; c33 += x3 * b3;
  }
  const v8d rows[kMicroRows][4] = {{c00, c01, c02, c03}, {c10, c11, c12, c13}, {c20, c21, c22, c23},
                                   {c30, c31, c32, c33}};
  for (std::size_t r = 0; r < kMicroRows; ++r) {
    T* crow = c + r * n + j0;
    for (std::size_t l = 0; l < 4; ++l) {
      for (std::size_t j = 0; j < 8; ++j) crow[8 * l + j] = static_cast<T>(rows[r][l][j]);
    }
  }
}

// Ragged edge tile.
template <typename T>
void gemm_tile_edge(bool trans_a, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c,
                    std::size_t i0, std::size_t j0, std::size_t ni, std::size_t nj) {
  double acc[kMicroRows][kMicroCols] = {};
  for (std::size_t kk = 0; kk < k; ++kk) {
    const T* brow = b + kk * n + j0;
    for (std::size_t r = 0; r < ni; ++r) {
      const double av = trans_a ? static_cast<double>(a[kk * m + i0 + r]) : static_cast<double>(a[(i0 + r) * k + kk]);
      for (std::size_t j = 0; j < nj; ++j) acc[r][j] += av * static_cast<double>(brow[j]);
    }
  }
  for (std::size_t r = 0; r < ni; ++r) {
    T* crow = c + (i0 + r) * n + j0;
    for (std::size_t j = 0; j < nj; ++j) crow[j] = static_cast<T>(acc[r][j]);
  }
}

}  // namespace

namespace kernels {

template <typename T>
void gemm(bool trans_a, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  const std::size_t row_blocks = (m + kMicroRows - 1) / kMicroRows;
  const std::size_t col_blocks = (n + kMicroCols - 1) / kMicroCols;
  const std::int64_t tiles = static_cast<std::int64_t>(row_blocks * col_blocks);

#pragma omp parallel for schedule(static) if (m * n * k >= kParallelWork)
  for (std::int64_t t = 0; t < tiles; ++t) {
    // Column-block-major order keeps one panel of B hot across row blocks.
    const std::size_t i0 = static_cast<std::size_t>(t) % row_blocks * kMicroRows;
    const std::size_t j0 = static_cast<std::size_t>(t) / row_blocks * kMicroCols;
    const std::size_t ni = std::min(kMicroRows, m - i0);
    const std::size_t nj = std::min(kMicroCols, n - j0);
    if (ni == kMicroRows && nj == kMicroCols) {
      const T* a0 = trans_a ? a + i0 : a + i0 * k;
      const std::size_t row_step = trans_a ? 1 : k;
      const std::size_t k_step = trans_a ? m : 1;
      gemm_tile_full(a0, row_step, k_step, n, k, b, c + i0 * n, j0);
    } else {
      gemm_tile_edge(trans_a, m, n, k, a, b, c, i0, j0, ni, nj);
    }
  }
}

template <typename T>
void transpose(std::size_t rows, std::size_t cols, const T* in, T* out) {
  constexpr std::size_t block = 32;
  for (std::size_t i0 = 0; i0 < rows; i0 += block) {
    for (std::size_t j0 = 0; j0 < cols; j0 += block) {
      const std::size_t i1 = std::min(rows, i0 + block), j1 = std::min(cols, j0 + block);
      for (std::size_t i = i0; i < i1; ++i) {
        for (std::size_t j = j0; j < j1; ++j) out[j * rows + i] = in[i * cols + j];
      }
    }
  }
}

template <typename T>
void im2col(const ConvGeometry& g, const T* input, T* cols) {
  const std::int64_t batch = static_cast<std::int64_t>(g.batch);
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < batch; ++n) im2col_sample(g, static_cast<std::size_t>(n), input, cols);
}

template <typename T>
void col2im(const ConvGeometry& g, const T* cols, T* input_grad) {
  const std::int64_t batch = static_cast<std::int64_t>(g.batch);
#pragma omp parallel for schedule(static)
  for (std::int64_t n = 0; n < batch; ++n) col2im_sample(g, static_cast<std::size_t>(n), cols, input_grad);
}

template void gemm<float>(bool, std::size_t, std::size_t, std::size_t, const float*, const float*, float*);
template void gemm<double>(bool, std::size_t, std::size_t, std::size_t, const double*, const double*, double*);
template void transpose<float>(std::size_t, std::size_t, const float*, float*);
template void transpose<double>(std::size_t, std::size_t, const double*, double*);
template void im2col<float>(const ConvGeometry&, const float*, float*);
template void im2col<double>(const ConvGeometry&, const double*, double*);
template void col2im<float>(const ConvGeometry&, const float*, float*);
template void col2im<double>(const ConvGeometry&, const double*, double*);

}  // namespace kernels

namespace reference {

template <typename T>
void gemm(bool trans_a, std::size_t m, std::size_t n, std::size_t k, const T* a, const T* b, T* c) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t kk = 0; kk < k; ++kk) {
        const double av = trans_a ? a[kk * m + i] : a[i * k + kk];
        acc += av * static_cast<double>(b[kk * n + j]);
      }
      c[i * n + j] = static_cast<T>(acc);
    }
  }
}

template <typename T>
void im2col(const ConvGeometry& g, const T* input, T* cols) {
  for (std::size_t n = 0; n < g.batch; ++n) im2col_sample(g, n, input, cols);
}

template <typename T>
void col2im(const ConvGeometry& g, const T* cols, T* input_grad) {
  for (std::size_t n = 0; n < g.batch; ++n) col2im_sample(g, n, cols, input_grad);
}

template void gemm<float>(bool, std::size_t, std::size_t, std::size_t, const float*, const float*, float*);
template void gemm<double>(bool, std::size_t, std::size_t, std::size_t, const double*, const double*, double*);
template void im2col<float>(const ConvGeometry&, const float*, float*);
template void im2col<double>(const ConvGeometry&, const double*, double*);
template void col2im<float>(const ConvGeometry&, const float*, float*);
template void col2im<double>(const ConvGeometry&, const double*, double*);

}  // namespace reference

}  // namespace gin::nn
