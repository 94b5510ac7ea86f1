#include "nphf/model.hpp"

#include <cmath>
#include <random>

#include "nphf/errors.hpp"

namespace nphf {

using kernels::ConstMatrixRef;
using kernels::Matrix;
using kernels::MatrixRef;

void ModelConfig::validate() const {
  if (input_dim == 0 || first_hidden == 0 || block_width == 0)
    throw ShapeError("model dimensions must be at least 1");
}

std::size_t ModelConfig::parameter_count() const {
  const std::size_t w = block_width;
  return input_dim * first_hidden + first_hidden + first_hidden * w + w +
         num_blocks * 2 * (w * w + w) + w + 1;
}

template <class T>
Network<T>::Network(ModelConfig config, InputLayout layout) : config_(config), layout_(layout) {
  config_.validate();
  std::vector<std::pair<std::size_t, std::size_t>> dims = {{config_.input_dim, config_.first_hidden},
                                                           {config_.first_hidden, config_.block_width}};
  for (std::size_t b = 0; b < config_.num_blocks; ++b) {
    dims.emplace_back(config_.block_width, config_.block_width);
    dims.emplace_back(config_.block_width, config_.block_width);
  }
  dims.emplace_back(config_.block_width, 1);
  std::size_t offset = 0;
  for (const auto& [in, out] : dims) {
    layers_.push_back({in, out, offset, offset + in * out});
    offset += in * out + out;
  }
  params_.assign(offset, T{0});
}

template <class T>
Network<T> Network<T>::zeros(const ModelConfig& config, InputLayout layout) {
  return Network(config, layout);
}

template <class T>
Network<T> Network<T>::init(const ModelConfig& config, std::uint64_t seed, InputLayout layout) {
  Network net(config, layout);
  std::mt19937_64 rng(seed);
  for (const LayerShape& l : net.layers_) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(l.in)));
    for (std::size_t i = 0; i < l.in * l.out; ++i) net.params_[l.weight_offset + i] = static_cast<T>(dist(rng));
  }
  return net;
}

template <class T>
ConstMatrixRef<T> Network<T>::weights(std::size_t layer) const {
  const LayerShape& l = layers_[layer];
  return {params_.data() + l.weight_offset, l.in, l.out};
}

template <class T>
MatrixRef<T> Network<T>::weights(std::size_t layer) {
  const LayerShape& l = layers_[layer];
  return {params_.data() + l.weight_offset, l.in, l.out};
}

template <class T>
std::span<const T> Network<T>::bias(std::size_t layer) const {
  const LayerShape& l = layers_[layer];
  return {params_.data() + l.bias_offset, l.out};
}

template <class T>
std::span<T> Network<T>::bias(std::size_t layer) {
  const LayerShape& l = layers_[layer];
  return {params_.data() + l.bias_offset, l.out};
}

template <class T>
struct Network<T>::Activations {
  // hidden[0] = first ReLU layer, hidden[1] = block input, then per block: inner, output.
  std::vector<Matrix<T>> hidden;
  Matrix<T> output;
};

template <class T>
void Network<T>::run_forward(ConstMatrixRef<T> inputs, Activations& acts) const {
  if (inputs.cols != config_.input_dim)
    throw ShapeError("input width " + std::to_string(inputs.cols) + " does not match model input " +
                     std::to_string(config_.input_dim));
  const std::size_t m = inputs.rows;
  const std::size_t nblocks = config_.num_blocks;
  acts.hidden.resize(2 + 2 * nblocks);
  auto dense = [&](ConstMatrixRef<T> x, std::size_t layer, Matrix<T>& out) {
    out.resize(m, layers_[layer].out);
    kernels::matmul<T>(x, weights(layer), out.ref());
    kernels::add_bias<T>(out.ref(), bias(layer));
  };
  dense(inputs, 0, acts.hidden[0]);
  kernels::relu_inplace<T>(acts.hidden[0].ref());
  dense(acts.hidden[0].cref(), 1, acts.hidden[1]);
  kernels::relu_inplace<T>(acts.hidden[1].ref());
  for (std::size_t b = 0; b < nblocks; ++b) {
    const Matrix<T>& x = acts.hidden[1 + 2 * b];
    Matrix<T>& inner = acts.hidden[2 + 2 * b];
    Matrix<T>& out = acts.hidden[3 + 2 * b];
    dense(x.cref(), 2 + 2 * b, inner);
    kernels::relu_inplace<T>(inner.ref());
    dense(inner.cref(), 3 + 2 * b, out);
    T* __restrict o = out.data();
    const T* __restrict skip = x.data();
    for (std::size_t i = 0; i < out.flat().size(); ++i) o[i] += skip[i];
    kernels::relu_inplace<T>(out.ref());
  }
  dense(acts.hidden.back().cref(), layers_.size() - 1, acts.output);
}

template <class T>
std::vector<T> Network<T>::forward(ConstMatrixRef<T> inputs) const {
  Activations acts;
  run_forward(inputs, acts);
  return {acts.output.flat().begin(), acts.output.flat().end()};
}

template <class T>
T Network<T>::forward_one(std::span<const T> input) const {
  return forward(ConstMatrixRef<T>{input.data(), 1, input.size()})[0];
}

template <class T>
T Network<T>::loss(ConstMatrixRef<T> inputs, std::span<const T> targets) const {
  if (targets.size() != inputs.rows) throw ShapeError("target count does not match batch size");
  if (inputs.rows == 0) throw ShapeError("empty batch");
  const std::vector<T> out = forward(inputs);
  double sum = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double e = static_cast<double>(out[i]) - static_cast<double>(targets[i]);
    sum += e * e;
  }
  return static_cast<T>(sum / static_cast<double>(out.size()));
}

template <class T>
T Network<T>::loss_and_gradient(ConstMatrixRef<T> inputs, std::span<const T> targets,
                                std::span<T> grad) const {
  if (targets.size() != inputs.rows) throw ShapeError("target count does not match batch size");
  if (inputs.rows == 0) throw ShapeError("empty batch");
  if (grad.size() != params_.size()) throw ShapeError("gradient buffer size mismatch");
  Activations acts;
  run_forward(inputs, acts);
  const std::size_t m = inputs.rows;

  double sum = 0.0;
  Matrix<T> delta(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    const double e = static_cast<double>(acts.output(i, 0)) - static_cast<double>(targets[i]);
    sum += e * e;
    delta(i, 0) = static_cast<T>(2.0 * e / static_cast<double>(m));
  }

  auto grad_w = [&](std::size_t layer) {
    const LayerShape& l = layers_[layer];
    return MatrixRef<T>{grad.data() + l.weight_offset, l.in, l.out};
  };
  auto grad_b = [&](std::size_t layer) {
    const LayerShape& l = layers_[layer];
    return std::span<T>{grad.data() + l.bias_offset, l.out};
  };
  Matrix<T> xt;
  Matrix<T> wt;
  // Parameter gradients for layer given its input x and output delta d.
  auto layer_params = [&](ConstMatrixRef<T> x, ConstMatrixRef<T> d, std::size_t layer) {
    xt.resize(x.cols, x.rows);
    kernels::transpose<T>(x, xt.ref());
    kernels::matmul<T>(xt.cref(), d, grad_w(layer));
    kernels::column_sums<T>(d, grad_b(layer));
  };
  // Input delta of a layer: d · Wᵀ.
  auto back = [&](ConstMatrixRef<T> d, std::size_t layer, Matrix<T>& out, bool accumulate) {
    const ConstMatrixRef<T> w = weights(layer);
    wt.resize(w.cols, w.rows);
    kernels::transpose<T>(w, wt.ref());
    if (!accumulate) out.resize(m, w.rows);
    kernels::matmul<T>(d, wt.cref(), out.ref(), accumulate);
  };

  const std::size_t last = layers_.size() - 1;
  layer_params(acts.hidden.back().cref(), delta.cref(), last);
  Matrix<T> dx;
  back(delta.cref(), last, dx, false);

  Matrix<T> dinner;
  for (std::size_t b = config_.num_blocks; b-- > 0;) {
    const Matrix<T>& x = acts.hidden[1 + 2 * b];
    const Matrix<T>& inner = acts.hidden[2 + 2 * b];
    const Matrix<T>& out = acts.hidden[3 + 2 * b];
    kernels::relu_backward<T>(out.cref(), dx.ref());  // dx is now d(pre-activation sum)
    layer_params(inner.cref(), dx.cref(), 3 + 2 * b);
    back(dx.cref(), 3 + 2 * b, dinner, false);
    kernels::relu_backward<T>(inner.cref(), dinner.ref());
    layer_params(x.cref(), dinner.cref(), 2 + 2 * b);
    back(dinner.cref(), 2 + 2 * b, dx, true);  // skip path keeps the existing dx
  }

  kernels::relu_backward<T>(acts.hidden[1].cref(), dx.ref());
  layer_params(acts.hidden[0].cref(), dx.cref(), 1);
  Matrix<T> dh;
  back(dx.cref(), 1, dh, false);
  kernels::relu_backward<T>(acts.hidden[0].cref(), dh.ref());
  layer_params(inputs, dh.cref(), 0);
  return static_cast<T>(sum / static_cast<double>(m));
}

template <class T>
T train_step(Network<T>& model, AdamState<T>& optimizer, ConstMatrixRef<T> inputs,
             std::span<const T> targets) {
  if (optimizer.m.size() != model.parameter_count())
    throw ShapeError("optimizer state does not match model parameters");
  std::vector<T> grad(model.parameter_count());
  const T loss = model.loss_and_gradient(inputs, targets, grad);
  if (!std::isfinite(static_cast<double>(loss)))
    throw TrainingDivergence("non-finite training loss at optimizer step " +
                             std::to_string(optimizer.step + 1));
  ++optimizer.step;
  kernels::adam_update<T>(model.parameters(), grad, optimizer.m, optimizer.v, optimizer.hyper, optimizer.step);
  return loss;
}

GradientCheckResult gradient_check(const Network<double>& model, ConstMatrixRef<double> inputs,
                                   std::span<const double> targets, double tolerance) {
  constexpr double kStep = 1e-5;
  constexpr double kFloor = 1e-8;
  std::vector<double> analytic(model.parameter_count());
  model.loss_and_gradient(inputs, targets, analytic);
  Network<double> probe = model;
  GradientCheckResult result;
  auto params = probe.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + kStep;
    const double up = probe.loss(inputs, targets);
    params[i] = saved - kStep;
    const double down = probe.loss(inputs, targets);
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * kStep);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), kFloor});
    const double rel = std::abs(analytic[i] - numeric) / denom;
    if (rel > result.max_relative_error || i == 0) {
      result.max_relative_error = rel;
      result.worst_parameter = i;
      result.analytic = analytic[i];
      result.numeric = numeric;
    }
  }
  result.passed = result.max_relative_error <= tolerance;
  return result;
}

GradientCheckResult gradient_check(const ModelConfig& config, std::uint64_t seed, double tolerance,
                                   std::size_t batch) {
  const Network<double> model = Network<double>::init(config, seed);
  std::mt19937_64 rng(seed ^ 0x5DEECE66DULL);
  std::uniform_real_distribution<double> input(-1.0, 1.0);
  std::uniform_real_distribution<double> target(0.0, 5.0);
  Matrix<double> x(batch, config.input_dim);
  for (double& v : x.flat()) v = input(rng);
  std::vector<double> t(batch);
  for (double& v : t) v = target(rng);
  return gradient_check(model, x.cref(), t, tolerance);
}

template class Network<float>;
template class Network<double>;
template float train_step<float>(Network<float>&, AdamState<float>&, ConstMatrixRef<float>, std::span<const float>);
template double train_step<double>(Network<double>&, AdamState<double>&, ConstMatrixRef<double>,
                                   std::span<const double>);

}  // namespace nphf
