#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "nphf/domain_gen.hpp"
#include "nphf/model.hpp"
#include "nphf/oracle.hpp"
#include "nphf/puzzle.hpp"

namespace nphf {

enum class TrainMode { action_conditioned, ablation_no_actions, fixed_domain };

std::string_view name(TrainMode mode);
/// Accepts conditioned|ablation|fixed and the long enum names.
TrainMode parse_train_mode(std::string_view s);

struct TrainConfig {
  int puzzle_n = 3;
  TrainMode mode = TrainMode::action_conditioned;
  DomainSpec fixed_domain{3, DomainKind::canonical, 0, 0.5};  // fixed_domain mode only
  double inclusion_prob = 0.5;                                  // random domain draws
  std::size_t domain_pool = 0;  // 0 = fresh domain per state, else a pool of this many
  std::size_t max_scramble = 500;
  std::size_t batch_size = 1000;
  std::size_t total_examples = 1'000'000;
  double target_update_loss_threshold = 0.05;
  std::size_t target_update_window = 20;     // steps averaged for the update test
  std::size_t target_update_max_steps = 0;   // 0 = loss threshold only
  std::size_t checkpoint_every = 100;        // optimizer steps
  std::optional<std::filesystem::path> checkpoint_path;
  std::uint64_t seed = 1;
  std::size_t workers = 1;
  std::size_t first_hidden = 400;
  std::size_t block_width = 128;
  std::size_t num_blocks = 2;
  kernels::AdamHyper optimizer;

  bool with_actions() const { return mode != TrainMode::ablation_no_actions; }
  std::size_t input_dim() const { return encoded_size(puzzle_n, with_actions()); }
  ModelConfig model_config() const { return {input_dim(), first_hidden, block_width, num_blocks}; }
  /// Throws DomainError on inconsistent settings.
  void validate() const;
};

struct Sample {
  PuzzleDomain domain;
  PuzzleState state;
  std::size_t walk_len;
};

struct Batch {
  std::vector<Sample> samples;
  kernels::Matrix<float> inputs;  // one encoded row per sample
  bool with_actions = true;
};

/// Draws the per-sample domain and random-walk state. With `pool` set, domains are picked
/// from it instead of generated fresh.
Batch sample_batch(const TrainConfig& config, std::mt19937_64& rng, std::size_t count,
                   std::span<const PuzzleDomain> pool = {});
inline Batch sample_batch(const TrainConfig& config, std::mt19937_64& rng) {
  return sample_batch(config, rng, config.batch_size);
}

struct TargetBatch {
  std::vector<float> values;  // one per sample; NaN where skipped
  std::vector<bool> valid;
  std::size_t dead_ends = 0;
};

/// Bellman targets: 0 at the goal, else min over permitted moves of 1 + h(next), with
/// h(next) clamped at 0 and taken as 0 when next is the goal. All children go through
/// one batched forward call.
TargetBatch compute_targets(const HeuristicModel& target_model, const Batch& batch);

struct CheckpointRecord {
  std::size_t step;
  std::size_t examples;
  double loss;  // mean over the steps since the previous record
  std::size_t target_updates;
  double wall_secs;
};

struct TrainReport {
  std::vector<CheckpointRecord> curve;
  std::size_t examples_seen = 0;
  std::size_t steps = 0;
  std::size_t target_updates = 0;
  std::size_t dead_ends_skipped = 0;
  double wall_secs = 0.0;
  bool multi_worker = false;
  std::vector<std::size_t> walk_length_counts;  // histogram over [0, max_scramble]
};

struct TrainResult {
  HeuristicModel model;
  TrainReport report;
};

using ProgressFn = std::function<void(const CheckpointRecord&)>;

/// Deep approximate value iteration: sample → targets from the frozen copy → one
/// Adam step on the live model; the frozen copy is refreshed when the running mean loss
/// falls below the threshold.
TrainResult train(const TrainConfig& config, const ProgressFn& progress = {});

/// Writes CheckpointRecords as CSV: step,examples,loss,target_updates,wall_secs.
std::string train_log_csv(const TrainReport& report);

struct TabularResult {
  OracleTable values;
  std::size_t sweeps = 0;
  bool converged = false;
};

using SweepObserver = std::function<void(std::size_t sweep, std::span<const int> values)>;

/// Synchronous value-iteration sweeps v(s) ← min_a (1 + v(T(s,a))) over the goal component,
/// from zero initialization with the goal pinned at 0.
TabularResult tabular_vi(const PuzzleDomain& domain, std::size_t max_sweeps = 1000,
                         std::size_t cap = kDefaultStateCap, const SweepObserver& observer = {});

}  // namespace nphf
