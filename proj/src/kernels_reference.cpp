#include <cmath>

#include "nphf/kernels.hpp"

namespace nphf::kernels::reference {

template <class T>
void matmul(ConstMatrixRef<T> a, ConstMatrixRef<T> b, MatrixRef<T> c, bool accumulate) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.cols; ++j) {
      T sum = accumulate ? c(i, j) : T{0};
      for (std::size_t p = 0; p < a.cols; ++p) sum += a(i, p) * b(p, j);
      c(i, j) = sum;
    }
  }
}

template <class T>
void transpose(ConstMatrixRef<T> a, MatrixRef<T> out) {
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
}

template <class T>
void add_bias(MatrixRef<T> c, std::span<const T> bias) {
  for (std::size_t i = 0; i < c.rows; ++i)
    for (std::size_t j = 0; j < c.cols; ++j) c(i, j) += bias[j];
}

template <class T>
void relu_inplace(MatrixRef<T> c) {
  for (std::size_t i = 0; i < c.size(); ++i)
    if (c.data[i] < T{0}) c.data[i] = T{0};
}

template <class T>
void relu_backward(ConstMatrixRef<T> activated, MatrixRef<T> grad) {
  for (std::size_t i = 0; i < grad.size(); ++i)
    if (!(activated.data[i] > T{0})) grad.data[i] = T{0};
}

template <class T>
void column_sums(ConstMatrixRef<T> a, std::span<T> out, bool accumulate) {
  for (std::size_t j = 0; j < a.cols; ++j) {
    T sum = accumulate ? out[j] : T{0};
    for (std::size_t i = 0; i < a.rows; ++i) sum += a(i, j);
    out[j] = sum;
  }
}

template <class T>
void adam_update(std::span<T> params, std::span<const T> grads, std::span<T> m, std::span<T> v,
                 const AdamHyper& hyper, long step) {
  const double c1 = 1.0 - std::pow(hyper.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(hyper.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    const double mi = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * g;
    const double vi = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * g * g;
    m[i] = static_cast<T>(mi);
    v[i] = static_cast<T>(vi);
    const double mhat = static_cast<double>(m[i]) / c1;
    const double vhat = static_cast<double>(v[i]) / c2;
    params[i] = static_cast<T>(params[i] - hyper.learning_rate * mhat / (std::sqrt(vhat) + hyper.epsilon));
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

}  // namespace nphf::kernels::reference
