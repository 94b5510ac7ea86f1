#include "nphf/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace nphf::kernels {

namespace {

constexpr std::size_t kRowBlock = 12;
// Fewer than this many multiply-adds stays on the calling thread.
constexpr std::size_t kParallelWork = std::size_t{1} << 16;

template <class T>
constexpr std::size_t col_block() {
  return 128 / sizeof(T);
}

// Register tile: kRowBlock rows of c, col_block<T>() columns, full inner dimension.
// Accumulators are GCC vector-extension registers so they never spill to the stack.
template <class T>
inline void dense_tile(const T* __restrict a, std::size_t lda, const T* __restrict b, std::size_t ldb,
                       T* __restrict c, std::size_t ldc, std::size_t k, bool accumulate) {
  constexpr std::size_t NB = col_block<T>();
  constexpr std::size_t kLanes = 64 / sizeof(T);
  constexpr std::size_t kVecs = NB / kLanes;
  using Vec [[gnu::vector_size(64)]] = T;
  Vec sum[kRowBlock][kVecs];
  for (std::size_t r = 0; r < kRowBlock; ++r)
    for (std::size_t v = 0; v < kVecs; ++v) {
      if (accumulate) {
        std::memcpy(&sum[r][v], c + r * ldc + v * kLanes, sizeof(Vec));
      } else {
        sum[r][v] = Vec{};
      }
    }
  for (std::size_t p = 0; p < k; ++p) {
    const T* bp = b + p * ldb;
    Vec bv[kVecs];
    for (std::size_t v = 0; v < kVecs; ++v) std::memcpy(&bv[v], bp + v * kLanes, sizeof(Vec));
    for (std::size_t r = 0; r < kRowBlock; ++r) {
      const T av = a[r * lda + p];
      for (std::size_t v = 0; v < kVecs; ++v) sum[r][v] += av * bv[v];
    }
  }
  for (std::size_t r = 0; r < kRowBlock; ++r)
    for (std::size_t v = 0; v < kVecs; ++v) std::memcpy(c + r * ldc + v * kLanes, &sum[r][v], sizeof(Vec));
}

// c[row, j0:j1] (+)= a[row, :] · b[:, j0:j1], skipping zero entries of a.
template <class T>
inline void axpy_row(const T* __restrict arow, const T* __restrict b, std::size_t ldb, T* __restrict crow,
                     std::size_t k, std::size_t j0, std::size_t j1, bool accumulate) {
  if (!accumulate) std::fill(crow + j0, crow + j1, T{0});
  for (std::size_t p = 0; p < k; ++p) {
    const T av = arow[p];
    if (av == T{0}) continue;
    const T* bp = b + p * ldb;
#pragma omp simd
    for (std::size_t j = j0; j < j1; ++j) crow[j] += av * bp[j];
  }
}

template <class T>
std::size_t count_nonzero(ConstMatrixRef<T> a) {
  std::size_t nnz = 0;
#pragma omp simd reduction(+ : nnz)
  for (std::size_t i = 0; i < a.size(); ++i) nnz += a.data[i] != T{0};
  return nnz;
}

}  // namespace

template <class T>
void matmul(ConstMatrixRef<T> a, ConstMatrixRef<T> b, MatrixRef<T> c, bool accumulate) {
  const std::size_t m = a.rows;
  const std::size_t k = a.cols;
  const std::size_t n = b.cols;
  const bool parallel = m * k * n >= kParallelWork;
  // One-hot inputs are mostly zeros; the row kernel skips them.
  const bool sparse = m * k > 0 && count_nonzero(a) * 4 < m * k;
  constexpr std::size_t NB = col_block<T>();
  if (sparse || n < NB) {
#pragma omp parallel for schedule(static) if (parallel)
    for (std::size_t i = 0; i < m; ++i) axpy_row(a.row(i), b.data, n, c.row(i), k, 0, n, accumulate);
    return;
  }
  const std::size_t row_blocks = m / kRowBlock;
  const std::size_t full_cols = n / NB * NB;
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t blk = 0; blk < row_blocks; ++blk) {
    const std::size_t i0 = blk * kRowBlock;
    for (std::size_t j0 = 0; j0 < full_cols; j0 += NB)
      dense_tile(a.row(i0), k, b.data + j0, n, c.row(i0) + j0, n, k, accumulate);
    if (full_cols < n)
      for (std::size_t r = 0; r < kRowBlock; ++r)
        axpy_row(a.row(i0 + r), b.data, n, c.row(i0 + r), k, full_cols, n, accumulate);
  }
  for (std::size_t i = row_blocks * kRowBlock; i < m; ++i)
    axpy_row(a.row(i), b.data, n, c.row(i), k, 0, n, accumulate);
}

template <class T>
void transpose(ConstMatrixRef<T> a, MatrixRef<T> out) {
  constexpr std::size_t kTile = 32;
  const bool parallel = a.size() >= kParallelWork;
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t i0 = 0; i0 < a.rows; i0 += kTile)
    for (std::size_t j0 = 0; j0 < a.cols; j0 += kTile)
      for (std::size_t i = i0; i < std::min(i0 + kTile, a.rows); ++i)
        for (std::size_t j = j0; j < std::min(j0 + kTile, a.cols); ++j) out(j, i) = a(i, j);
}

template <class T>
void add_bias(MatrixRef<T> c, std::span<const T> bias) {
  const bool parallel = c.size() >= kParallelWork;
  const T* __restrict bb = bias.data();
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t i = 0; i < c.rows; ++i) {
    T* __restrict row = c.row(i);
#pragma omp simd
    for (std::size_t j = 0; j < c.cols; ++j) row[j] += bb[j];
  }
}

template <class T>
void relu_inplace(MatrixRef<T> c) {
  const bool parallel = c.size() >= kParallelWork;
  T* __restrict d = c.data;
#pragma omp parallel for simd schedule(static) if (parallel)
  for (std::size_t i = 0; i < c.size(); ++i) d[i] = d[i] > T{0} ? d[i] : T{0};
}

template <class T>
void relu_backward(ConstMatrixRef<T> activated, MatrixRef<T> grad) {
  const bool parallel = grad.size() >= kParallelWork;
  const T* __restrict act = activated.data;
  T* __restrict g = grad.data;
#pragma omp parallel for simd schedule(static) if (parallel)
  for (std::size_t i = 0; i < grad.size(); ++i) g[i] = act[i] > T{0} ? g[i] : T{0};
}

template <class T>
void column_sums(ConstMatrixRef<T> a, std::span<T> out, bool accumulate) {
  // Rows are summed in order per column so the result does not depend on thread count.
  const bool parallel = a.size() >= kParallelWork;
  constexpr std::size_t NB = col_block<T>();
#pragma omp parallel for schedule(static) if (parallel)
  for (std::size_t j0 = 0; j0 < a.cols; j0 += NB) {
    const std::size_t j1 = std::min(j0 + NB, a.cols);
    if (!accumulate) std::fill(out.begin() + static_cast<std::ptrdiff_t>(j0), out.begin() + static_cast<std::ptrdiff_t>(j1), T{0});
    T* __restrict o = out.data();
    for (std::size_t i = 0; i < a.rows; ++i) {
      const T* __restrict row = a.row(i);
#pragma omp simd
      for (std::size_t j = j0; j < j1; ++j) o[j] += row[j];
    }
  }
}

template <class T>
void adam_update(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v,
                 const AdamHyper& hyper, long step) {
  const T b1 = static_cast<T>(hyper.beta1);
  const T b2 = static_cast<T>(hyper.beta2);
  const T lr = static_cast<T>(hyper.learning_rate);
  const T eps = static_cast<T>(hyper.epsilon);
  const T inv_c1 = static_cast<T>(1.0 / (1.0 - std::pow(hyper.beta1, static_cast<double>(step))));
  const T inv_c2 = static_cast<T>(1.0 / (1.0 - std::pow(hyper.beta2, static_cast<double>(step))));
  T* __restrict p = params.data();
  const T* __restrict g = grads.data();
  T* __restrict mm = m.data();
  T* __restrict vv = v.data();
  const bool parallel = params.size() >= kParallelWork;
#pragma omp parallel for simd schedule(static) if (parallel)
  for (std::size_t i = 0; i < params.size(); ++i) {
    const T gi = g[i];
    mm[i] = b1 * mm[i] + (T{1} - b1) * gi;
    vv[i] = b2 * vv[i] + (T{1} - b2) * gi * gi;
    p[i] -= lr * (mm[i] * inv_c1) / (std::sqrt(vv[i] * inv_c2) + eps);
  }
}

#define NPHF_INSTANTIATE(T)                                                                       \
  template void matmul<T>(ConstMatrixRef<T>, ConstMatrixRef<T>, MatrixRef<T>, bool);             \
  template void transpose<T>(ConstMatrixRef<T>, MatrixRef<T>);                                   \
  template void add_bias<T>(MatrixRef<T>, std::span<const T>);                                   \
  template void relu_inplace<T>(MatrixRef<T>);                                                   \
  template void relu_backward<T>(ConstMatrixRef<T>, MatrixRef<T>);                               \
  template void column_sums<T>(ConstMatrixRef<T>, std::span<T>, bool);                           \
  template void adam_update<T>(std::span<T>, std::span<const T>, std::span<T>, std::span<T>,     \
                               const AdamHyper&, long);

NPHF_INSTANTIATE(float)
NPHF_INSTANTIATE(double)

#undef NPHF_INSTANTIATE

}  // namespace nphf::kernels
