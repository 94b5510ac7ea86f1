#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "nphf/kernels.hpp"

using namespace nphf::kernels;

namespace {

template <class T>
Matrix<T> random_matrix(std::size_t r, std::size_t c, std::mt19937_64& rng, double density = 1.0) {
  Matrix<T> m(r, c);
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::bernoulli_distribution keep(density);
  for (T& x : m.flat()) x = keep(rng) ? static_cast<T>(val(rng)) : T{0};
  return m;
}

template <class T>
double max_abs_diff(std::span<const T> a, std::span<const T> b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(double(a[i]) - double(b[i])));
  return worst;
}

}  // namespace

TEST_CASE_TEMPLATE("matmul matches the serial reference", T, float, double) {
  std::mt19937_64 rng(1);
  const double tol = sizeof(T) == 4 ? 2e-4 : 1e-12;
  const int shapes[][3] = {{1, 1, 1},   {3, 5, 7},     {12, 32, 32}, {13, 33, 31},  {100, 153, 400},
                           {37, 400, 128}, {128, 64, 1}, {1, 128, 128}, {250, 81, 64}, {5, 1000, 3}};
  for (const auto& s : shapes) {
    for (double density : {1.0, 0.05}) {
      const auto m = static_cast<std::size_t>(s[0]), k = static_cast<std::size_t>(s[1]),
                 n = static_cast<std::size_t>(s[2]);
      const Matrix<T> a = random_matrix<T>(m, k, rng, density);
      const Matrix<T> b = random_matrix<T>(k, n, rng);
      Matrix<T> fast = random_matrix<T>(m, n, rng), slow = fast;
      matmul<T>(a.cref(), b.cref(), fast.ref(), false);
      reference::matmul<T>(a.cref(), b.cref(), slow.ref(), false);
      CHECK(max_abs_diff<T>(fast.flat(), slow.flat()) <= tol * static_cast<double>(k));
      matmul<T>(a.cref(), b.cref(), fast.ref(), true);
      reference::matmul<T>(a.cref(), b.cref(), slow.ref(), true);
      CHECK(max_abs_diff<T>(fast.flat(), slow.flat()) <= 2 * tol * static_cast<double>(k));
    }
  }
}

TEST_CASE_TEMPLATE("elementwise kernels match the serial reference", T, float, double) {
  std::mt19937_64 rng(2);
  for (auto [r, c] : {std::pair<std::size_t, std::size_t>{1, 1}, {7, 9}, {300, 128}}) {
    const Matrix<T> a = random_matrix<T>(r, c, rng);
    Matrix<T> t1(c, r), t2(c, r);
    transpose<T>(a.cref(), t1.ref());
    reference::transpose<T>(a.cref(), t2.ref());
    CHECK(max_abs_diff<T>(t1.flat(), t2.flat()) == 0.0);

    std::vector<T> bias(c);
    for (T& x : bias) x = static_cast<T>(std::uniform_real_distribution<double>(-1, 1)(rng));
    Matrix<T> b1 = a, b2 = a;
    add_bias<T>(b1.ref(), bias);
    reference::add_bias<T>(b2.ref(), bias);
    CHECK(max_abs_diff<T>(b1.flat(), b2.flat()) == 0.0);

    relu_inplace<T>(b1.ref());
    reference::relu_inplace<T>(b2.ref());
    CHECK(max_abs_diff<T>(b1.flat(), b2.flat()) == 0.0);
    for (T x : b1.flat()) CHECK(x >= T{0});

    Matrix<T> g1 = random_matrix<T>(r, c, rng), g2 = g1;
    relu_backward<T>(b1.cref(), g1.ref());
    reference::relu_backward<T>(b2.cref(), g2.ref());
    CHECK(max_abs_diff<T>(g1.flat(), g2.flat()) == 0.0);

    std::vector<T> s1(c, T{1}), s2(c, T{1});
    column_sums<T>(a.cref(), s1, true);
    reference::column_sums<T>(a.cref(), s2, true);
    CHECK(max_abs_diff<T>(std::span<const T>(s1), std::span<const T>(s2)) <= 1e-5 * static_cast<double>(r));
  }
}

TEST_CASE_TEMPLATE("adam matches the serial reference", T, float, double) {
  std::mt19937_64 rng(3);
  const std::size_t n = 5000;
  std::vector<T> p1(n), g(n), m1(n), v1(n);
  std::normal_distribution<double> nd;
  for (auto& x : p1) x = static_cast<T>(nd(rng));
  auto p2 = p1, m2 = m1, v2 = v1;
  const AdamHyper h{1e-3, 0.9, 0.999, 1e-8};
  for (long step = 1; step <= 20; ++step) {
    for (auto& x : g) x = static_cast<T>(nd(rng));
    adam_update<T>(p1, g, m1, v1, h, step);
    reference::adam_update<T>(p2, g, m2, v2, h, step);
  }
  CHECK(max_abs_diff<T>(std::span<const T>(p1), std::span<const T>(p2)) <= (sizeof(T) == 4 ? 1e-5 : 1e-12));
  CHECK(max_abs_diff<T>(std::span<const T>(m1), std::span<const T>(m2)) <= (sizeof(T) == 4 ? 1e-5 : 1e-12));
}

TEST_CASE("adam first step moves by the learning rate") {
  // With bias correction the first update is lr * g / (|g| + eps) per coordinate.
  std::vector<double> p{0.0, 1.0}, g{0.5, -2.0}, m(2), v(2);
  adam_update<double>(p, g, m, v, AdamHyper{0.01, 0.9, 0.999, 1e-8}, 1);
  CHECK(p[0] == doctest::Approx(-0.01).epsilon(1e-6));
  CHECK(p[1] == doctest::Approx(1.01).epsilon(1e-6));
}
