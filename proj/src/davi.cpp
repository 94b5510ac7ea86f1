#include "nphf/davi.hpp"

#include <omp.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "nphf/errors.hpp"
#include "nphf/seeding.hpp"

namespace nphf {

using kernels::Matrix;

std::string_view name(TrainMode mode) {
  switch (mode) {
    case TrainMode::action_conditioned: return "conditioned";
    case TrainMode::ablation_no_actions: return "ablation";
    case TrainMode::fixed_domain: return "fixed";
  }
  return "conditioned";
}

TrainMode parse_train_mode(std::string_view s) {
  if (s == "conditioned" || s == "action_conditioned") return TrainMode::action_conditioned;
  if (s == "ablation" || s == "ablation_no_actions") return TrainMode::ablation_no_actions;
  if (s == "fixed" || s == "fixed_domain") return TrainMode::fixed_domain;
  throw DomainError("unknown training mode \"" + std::string(s) + "\"");
}

void TrainConfig::validate() const {
  if (puzzle_n < 2 || puzzle_n > kMaxDim) throw InvalidDimension("puzzle_n out of range");
  if (batch_size < 1) throw DomainError("batch_size must be at least 1");
  if (!(inclusion_prob >= 0.0 && inclusion_prob <= 1.0)) throw DomainError("inclusion_prob must lie in [0, 1]");
  if (mode == TrainMode::fixed_domain && fixed_domain.n != puzzle_n)
    throw DomainError("fixed domain dimension differs from puzzle_n");
  if (checkpoint_every < 1) throw DomainError("checkpoint_every must be at least 1");
  model_config().validate();
}

Batch sample_batch(const TrainConfig& config, std::mt19937_64& rng, std::size_t count,
                   std::span<const PuzzleDomain> pool) {
  struct Draw {
    std::uint64_t domain_seed;
    std::size_t pool_index;
    std::size_t walk_len;
    std::uint64_t walk_seed;
  };
  std::uniform_int_distribution<std::size_t> walk(0, config.max_scramble);
  std::uniform_int_distribution<std::size_t> pick(0, pool.empty() ? 0 : pool.size() - 1);
  std::vector<Draw> draws(count);
  for (Draw& d : draws) {
    d.domain_seed = rng();
    d.pool_index = pool.empty() ? 0 : pick(rng);
    d.walk_len = walk(rng);
    d.walk_seed = rng();
  }
  const bool fixed = config.mode == TrainMode::fixed_domain;
  std::optional<PuzzleDomain> fixed_domain;
  if (fixed) fixed_domain = generate_random(config.fixed_domain);

  Batch batch;
  batch.with_actions = config.with_actions();
  const std::size_t dim = encoded_size(config.puzzle_n, batch.with_actions);
  batch.inputs.resize(count, dim);
  std::vector<std::optional<Sample>> built(count);
  // Every draw is fixed above, so the result does not depend on the thread count.
#pragma omp parallel for schedule(dynamic, 16) if (count > 64)
  for (std::size_t i = 0; i < count; ++i) {
    const Draw& d = draws[i];
    PuzzleDomain domain = fixed ? *fixed_domain
                          : !pool.empty()
                              ? pool[d.pool_index]
                              : generate_random({config.puzzle_n, DomainKind::random, d.domain_seed, config.inclusion_prob});
    std::mt19937_64 walk_rng(d.walk_seed);
    PuzzleState state = goal_state(config.puzzle_n);
    random_walk_from(domain, state, d.walk_len, walk_rng);
    encode_into<float>(domain, state, batch.with_actions, {batch.inputs.data() + i * dim, dim});
    built[i].emplace(Sample{std::move(domain), state, d.walk_len});
  }
  batch.samples.reserve(count);
  for (auto& s : built) batch.samples.push_back(std::move(*s));
  return batch;
}

TargetBatch compute_targets(const HeuristicModel& target_model, const Batch& batch) {
  const std::size_t count = batch.samples.size();
  TargetBatch out;
  out.values.assign(count, std::numeric_limits<float>::quiet_NaN());
  out.valid.assign(count, false);
  if (count == 0) return out;
  const int n = batch.samples.front().state.n();
  const std::size_t dim = encoded_size(n, batch.with_actions);
  require_input_dim(target_model, dim);

  std::vector<std::size_t> first_child(count + 1, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const Sample& s = batch.samples[i];
    const std::size_t kids = is_goal(s.state) ? 0 : static_cast<std::size_t>(available_actions(s.domain, s.state).size());
    first_child[i + 1] = first_child[i] + kids;
  }
  const std::size_t total = first_child[count];
  Matrix<float> children(total, dim);
  std::vector<char> child_is_goal(total, 0);
#pragma omp parallel for schedule(static) if (count > 64)
  for (std::size_t i = 0; i < count; ++i) {
    const Sample& s = batch.samples[i];
    if (is_goal(s.state)) continue;
    std::size_t row = first_child[i];
    s.domain.actions_at(s.state.blank()).for_each([&](Direction d) {
      const PuzzleState next = successor(s.state, d);
      child_is_goal[row] = is_goal(next);
      encode_into<float>(s.domain, next, batch.with_actions, {children.data() + row * dim, dim});
      ++row;
    });
  }
  const std::vector<float> h = total ? target_model.forward(children.cref()) : std::vector<float>{};
  for (std::size_t i = 0; i < count; ++i) {
    if (is_goal(batch.samples[i].state)) {
      out.values[i] = 0.0f;
      out.valid[i] = true;
      continue;
    }
    if (first_child[i] == first_child[i + 1]) {
      ++out.dead_ends;
      continue;
    }
    float best = std::numeric_limits<float>::infinity();
    for (std::size_t c = first_child[i]; c < first_child[i + 1]; ++c) {
      const float next = child_is_goal[c] ? 0.0f : std::max(h[c], 0.0f);
      best = std::min(best, 1.0f + next);
    }
    out.values[i] = best;
    out.valid[i] = true;
  }
  if (out.dead_ends) spdlog::warn("skipped {} non-goal states without permitted moves", out.dead_ends);
  return out;
}

TrainResult train(const TrainConfig& config, const ProgressFn& progress) {
  config.validate();
  const int threads = static_cast<int>(std::max<std::size_t>(config.workers, 1));
  omp_set_num_threads(threads);
  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); };

  const InputLayout layout{config.puzzle_n, config.with_actions()};
  HeuristicModel live = HeuristicModel::init(config.model_config(), derive_seed(config.seed, 0), layout);
  HeuristicModel frozen = live;
  AdamState<float> adam(live.parameter_count(), config.optimizer);
  std::mt19937_64 rng(derive_seed(config.seed, 1));

  std::vector<PuzzleDomain> pool;
  if (config.domain_pool > 0 && config.mode != TrainMode::fixed_domain) {
    std::mt19937_64 pool_rng(derive_seed(config.seed, 2));
    for (std::size_t i = 0; i < config.domain_pool; ++i)
      pool.push_back(generate_random({config.puzzle_n, DomainKind::random, pool_rng(), config.inclusion_prob}));
  }

  TrainReport report;
  report.multi_worker = threads > 1;
  report.walk_length_counts.assign(config.max_scramble + 1, 0);
  std::vector<double> window;
  std::size_t steps_since_update = 0;
  double checkpoint_loss_sum = 0.0;
  std::size_t checkpoint_loss_steps = 0;

  while (report.examples_seen < config.total_examples) {
    const std::size_t count = std::min(config.batch_size, config.total_examples - report.examples_seen);
    Batch batch = sample_batch(config, rng, count, pool);
    for (const Sample& s : batch.samples) ++report.walk_length_counts[s.walk_len];
    TargetBatch targets = compute_targets(frozen, batch);
    report.dead_ends_skipped += targets.dead_ends;
    report.examples_seen += count;

    if (targets.dead_ends) {
      std::size_t kept = 0;
      const std::size_t dim = batch.inputs.cols();
      for (std::size_t i = 0; i < count; ++i) {
        if (!targets.valid[i]) continue;
        std::copy_n(batch.inputs.data() + i * dim, dim, batch.inputs.data() + kept * dim);
        targets.values[kept++] = targets.values[i];
      }
      targets.values.resize(kept);
      batch.inputs.resize(kept, dim);
      if (kept == 0) continue;
    }

    double loss = 0.0;
    try {
      loss = train_step(live, adam, batch.inputs.cref(), std::span<const float>(targets.values));
    } catch (const TrainingDivergence& e) {
      throw TrainingDivergence(std::string(e.what()) + " after " + std::to_string(report.examples_seen) +
                               " examples; last checkpoint kept at step " +
                               std::to_string(report.curve.empty() ? 0 : report.curve.back().step));
    }
    ++report.steps;
    ++steps_since_update;
    checkpoint_loss_sum += loss;
    ++checkpoint_loss_steps;

    window.push_back(loss);
    if (window.size() > config.target_update_window) window.erase(window.begin());
    double mean = 0.0;
    for (double l : window) mean += l;
    mean /= static_cast<double>(window.size());
    const bool window_full = window.size() >= config.target_update_window;
    const bool by_loss = window_full && mean < config.target_update_loss_threshold;
    const bool by_age = config.target_update_max_steps > 0 && steps_since_update >= config.target_update_max_steps;
    if (by_loss || by_age) {
      frozen = live;
      ++report.target_updates;
      steps_since_update = 0;
      window.clear();
    }

    const bool last = report.examples_seen >= config.total_examples;
    if (report.steps % config.checkpoint_every == 0 || last) {
      CheckpointRecord rec{report.steps, report.examples_seen,
                           checkpoint_loss_sum / static_cast<double>(checkpoint_loss_steps),
                           report.target_updates, elapsed()};
      checkpoint_loss_sum = 0.0;
      checkpoint_loss_steps = 0;
      report.curve.push_back(rec);
      if (config.checkpoint_path) save_model(live, *config.checkpoint_path);
      if (progress) progress(rec);
    }
  }
  report.wall_secs = elapsed();
  return {std::move(live), std::move(report)};
}

std::string train_log_csv(const TrainReport& report) {
  std::string out = "step,examples,loss,target_updates,wall_secs\n";
  char line[160];
  for (const CheckpointRecord& r : report.curve) {
    std::snprintf(line, sizeof(line), "%zu,%zu,%.9g,%zu,%.3f\n", r.step, r.examples, r.loss, r.target_updates,
                  r.wall_secs);
    out += line;
  }
  return out;
}

TabularResult tabular_vi(const PuzzleDomain& domain, std::size_t max_sweeps, std::size_t cap,
                         const SweepObserver& observer) {
  if (!domain.is_reversible()) throw InvalidDomain("tabular value iteration needs a reversible domain");
  // Enumerate the goal component depth-first and build its adjacency lists.
  std::vector<PuzzleState> states;
  std::unordered_map<StateKey, std::uint32_t, StateKeyHash> index;
  std::vector<std::uint32_t> stack;
  const PuzzleState goal = goal_state(domain.n());
  states.push_back(goal);
  index.emplace(pack(goal), 0);
  stack.push_back(0);
  std::vector<std::vector<std::uint32_t>> adjacency(1);
  while (!stack.empty()) {
    const std::uint32_t id = stack.back();
    stack.pop_back();
    const PuzzleState s = states[id];
    domain.actions_at(s.blank()).for_each([&](Direction d) {
      const PuzzleState next = successor(s, d);
      auto [it, fresh] = index.emplace(pack(next), static_cast<std::uint32_t>(states.size()));
      if (fresh) {
        if (states.size() >= cap) throw CapacityError("goal component exceeds the state cap of " + std::to_string(cap));
        states.push_back(next);
        adjacency.emplace_back();
        stack.push_back(it->second);
      }
      adjacency[id].push_back(it->second);
    });
  }

  TabularResult result{OracleTable(domain), 0, false};
  std::vector<int> values(states.size(), 0);
  std::vector<int> next(states.size(), 0);
  if (observer) observer(0, values);
  while (result.sweeps < max_sweeps) {
    bool changed = false;
    for (std::size_t s = 0; s < states.size(); ++s) {
      if (s == 0) {  // goal
        next[s] = 0;
        continue;
      }
      int best = std::numeric_limits<int>::max();
      for (std::uint32_t t : adjacency[s]) best = std::min(best, 1 + values[t]);
      next[s] = best;
      changed |= best != values[s];
    }
    values.swap(next);
    ++result.sweeps;
    if (observer) observer(result.sweeps, values);
    if (!changed) {
      result.converged = true;
      break;
    }
  }
  for (std::size_t s = 0; s < states.size(); ++s) result.values.insert(states[s], values[s]);
  return result;
}

}  // namespace nphf
