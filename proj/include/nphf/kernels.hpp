#pragma once

// Dense-layer kernels. nphf::kernels holds the OpenMP versions used by the model;
// nphf::kernels::reference holds plain serial loops that tests and benchmarks compare against.

#include <cstddef>
#include <span>
#include <vector>

namespace nphf::kernels {

/// Row-major matrix view.
template <class T>
struct MatrixRef {
  T* data = nullptr;
  std::size_t rows = 0;
  std::size_t cols = 0;

  T* row(std::size_t r) const { return data + r * cols; }
  T& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::size_t size() const { return rows * cols; }
};

template <class T>
using ConstMatrixRef = MatrixRef<const T>;

/// Owning row-major matrix.
template <class T>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  void resize(std::size_t rows, std::size_t cols) {
    rows_ = rows;
    cols_ = cols;
    data_.resize(rows * cols);
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> flat() { return data_; }
  std::span<const T> flat() const { return data_; }
  T& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  MatrixRef<T> ref() { return {data_.data(), rows_, cols_}; }
  ConstMatrixRef<T> ref() const { return {data_.data(), rows_, cols_}; }
  ConstMatrixRef<T> cref() const { return {data_.data(), rows_, cols_}; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

struct AdamHyper {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// c = a·b, or c += a·b when accumulate. a: m×k, b: k×n, c: m×n.
template <class T>
void matmul(ConstMatrixRef<T> a, ConstMatrixRef<T> b, MatrixRef<T> c, bool accumulate = false);

template <class T>
void transpose(ConstMatrixRef<T> a, MatrixRef<T> out);

// Adds `bias` to every row of c.
template <class T>
void add_bias(MatrixRef<T> c, std::span<const T> bias);

template <class T>
void relu_inplace(MatrixRef<T> c);

// grad[i] = 0 wherever activated[i] <= 0.
template <class T>
void relu_backward(ConstMatrixRef<T> activated, MatrixRef<T> grad);

// out[j] (+)= sum_i a(i, j)
template <class T>
void column_sums(ConstMatrixRef<T> a, std::span<T> out, bool accumulate = false);

// One Adam step with bias correction; `step` counts from 1.
template <class T>
void adam_update(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v,
                 const AdamHyper& hyper, long step);

namespace reference {

template <class T>
void matmul(ConstMatrixRef<T> a, ConstMatrixRef<T> b, MatrixRef<T> c, bool accumulate = false);
template <class T>
void transpose(ConstMatrixRef<T> a, MatrixRef<T> out);
template <class T>
void add_bias(MatrixRef<T> c, std::span<const T> bias);
template <class T>
void relu_inplace(MatrixRef<T> c);
template <class T>
void relu_backward(ConstMatrixRef<T> activated, MatrixRef<T> grad);
template <class T>
void column_sums(ConstMatrixRef<T> a, std::span<T> out, bool accumulate = false);
template <class T>
void adam_update(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v,
                 const AdamHyper& hyper, long step);

}  // namespace reference

}  // namespace nphf::kernels
