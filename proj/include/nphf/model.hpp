#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "nphf/kernels.hpp"

namespace nphf {

struct ModelConfig {
  std::size_t input_dim = 0;
  std::size_t first_hidden = 400;
  std::size_t block_width = 128;
  std::size_t num_blocks = 2;

  static ModelConfig desk(std::size_t input_dim) { return {input_dim, 400, 128, 2}; }
  static ModelConfig full_scale(std::size_t input_dim) { return {input_dim, 5000, 1000, 4}; }

  /// Throws ShapeError when a dimension is zero.
  void validate() const;
  std::size_t parameter_count() const;
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// What the input vector encodes; carried in the weight file header.
struct InputLayout {
  int n = 0;  // 0 = unspecified
  bool with_actions = true;
  friend bool operator==(const InputLayout&, const InputLayout&) = default;
};

struct LayerShape {
  std::size_t in;
  std::size_t out;
  std::size_t weight_offset;  // weights stored in×out, row-major by input
  std::size_t bias_offset;
};

/// Dense residual network:
///   input → first_hidden (ReLU) → block_width (ReLU)
///   → num_blocks × [dense+ReLU, dense, add skip, ReLU] → scalar.
/// All parameters live in one contiguous buffer in layer order.
template <class T>
class Network {
 public:
  Network() = default;
  Network(ModelConfig config, InputLayout layout);  // zero parameters

  /// He-normal weights (variance 2/fan_in), zero biases.
  static Network init(const ModelConfig& config, std::uint64_t seed, InputLayout layout = {});
  static Network zeros(const ModelConfig& config, InputLayout layout = {});

  const ModelConfig& config() const { return config_; }
  const InputLayout& layout() const { return layout_; }
  std::span<const LayerShape> layers() const { return layers_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }

  kernels::ConstMatrixRef<T> weights(std::size_t layer) const;
  kernels::MatrixRef<T> weights(std::size_t layer);
  std::span<const T> bias(std::size_t layer) const;
  std::span<T> bias(std::size_t layer);

  /// One output per input row. Throws ShapeError if inputs.cols != input_dim.
  std::vector<T> forward(kernels::ConstMatrixRef<T> inputs) const;
  T forward_one(std::span<const T> input) const;

  /// Mean squared error against `targets`; writes d(loss)/d(params) into `grad`.
  T loss_and_gradient(kernels::ConstMatrixRef<T> inputs, std::span<const T> targets,
                      std::span<T> grad) const;
  T loss(kernels::ConstMatrixRef<T> inputs, std::span<const T> targets) const;

  template <class U>
  Network<U> cast() const {
    Network<U> out(config_, layout_);
    auto dst = out.parameters();
    for (std::size_t i = 0; i < params_.size(); ++i) dst[i] = static_cast<U>(params_[i]);
    return out;
  }

  friend bool operator==(const Network& a, const Network& b) {
    return a.config_ == b.config_ && a.layout_ == b.layout_ && a.params_ == b.params_;
  }

 private:
  struct Activations;
  void run_forward(kernels::ConstMatrixRef<T> inputs, Activations& acts) const;

  ModelConfig config_;
  InputLayout layout_;
  std::vector<LayerShape> layers_;
  std::vector<T> params_;
};

using HeuristicModel = Network<float>;

template <class T>
struct AdamState {
  kernels::AdamHyper hyper;
  std::vector<T> m;
  std::vector<T> v;
  long step = 0;

  AdamState() = default;
  explicit AdamState(std::size_t params, kernels::AdamHyper h = {}) : hyper(h), m(params), v(params) {}
};

/// One Adam step on the MSE gradient; returns the loss before the update.
/// Throws TrainingDivergence on a non-finite loss (parameters untouched).
template <class T>
T train_step(Network<T>& model, AdamState<T>& optimizer, kernels::ConstMatrixRef<T> inputs,
             std::span<const T> targets);

struct GradientCheckResult {
  double max_relative_error = 0.0;
  std::size_t worst_parameter = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  bool passed = false;
};

/// Analytic vs central finite-difference gradients (step 1e-5) in 64-bit on a random
/// batch; relative error uses max(|analytic|, |numeric|, 1e-8) as the denominator.
GradientCheckResult gradient_check(const ModelConfig& config, std::uint64_t seed, double tolerance,
                                   std::size_t batch = 4);
GradientCheckResult gradient_check(const Network<double>& model, kernels::ConstMatrixRef<double> inputs,
                                   std::span<const double> targets, double tolerance);

// Weight file: "NPHF1\0", version byte, u32 LE header length + JSON header, then
// little-endian float32 parameters per layer: weights row-major by output neuron, then biases.
void save_model(const HeuristicModel& model, const std::filesystem::path& path);
/// Throws CorruptModel on bad magic, version, truncation, or header/payload mismatch.
HeuristicModel load_model(const std::filesystem::path& path);
/// Throws CorruptModel if the model's input dimension differs from `expected_input_dim`.
void require_input_dim(const HeuristicModel& model, std::size_t expected_input_dim);

}  // namespace nphf
