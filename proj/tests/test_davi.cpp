#include <doctest.h>

#include <algorithm>
#include <set>

#include "nphf/davi.hpp"
#include "nphf/domain_io.hpp"
#include "nphf/errors.hpp"
#include "nphf/seeding.hpp"

using namespace nphf;

namespace {

TrainConfig small_config(TrainMode mode, int n = 3) {
  TrainConfig c;
  c.puzzle_n = n;
  c.mode = mode;
  c.fixed_domain = {n, DomainKind::canonical, 0, 0.5};
  c.first_hidden = 32;
  c.block_width = 16;
  c.num_blocks = 1;
  return c;
}

Batch batch_of(const PuzzleDomain& d, std::vector<PuzzleState> states, bool with_actions) {
  Batch b;
  b.with_actions = with_actions;
  const std::size_t dim = encoded_size(d.n(), with_actions);
  b.inputs.resize(states.size(), dim);
  for (std::size_t i = 0; i < states.size(); ++i) {
    encode_into<float>(d, states[i], with_actions, {b.inputs.data() + i * dim, dim});
    b.samples.push_back({d, states[i], 0});
  }
  return b;
}

// 2×2 ablation model whose output is value[blank cell]: identity hidden layers over the
// one-hot input, output weights on the "blank at cell k" features.
HeuristicModel blank_cell_model(const std::array<float, 4>& value) {
  HeuristicModel m = HeuristicModel::zeros({16, 16, 16, 0}, {2, false});
  for (std::size_t l : {0, 1}) {
    auto w = m.weights(l);
    for (std::size_t i = 0; i < 16; ++i) w(i, i) = 1.0f;
  }
  auto out = m.weights(2);
  for (std::size_t k = 0; k < 4; ++k) out(k * 4 + 0, 0) = value[k];
  return m;
}

}  // namespace

TEST_CASE("sample batch contracts") {
  auto cfg = small_config(TrainMode::fixed_domain);
  cfg.max_scramble = 0;
  std::mt19937_64 rng(1);
  const Batch goals = sample_batch(cfg, rng, 20);
  for (const auto& s : goals.samples) CHECK(is_goal(s.state));
  CHECK(goals.inputs.cols() == 153);

  auto cond = small_config(TrainMode::action_conditioned);
  std::mt19937_64 r1(5), r2(5);
  const Batch a = sample_batch(cond, r1, 100), b = sample_batch(cond, r2, 100);
  std::set<std::string> distinct;
  for (std::size_t i = 0; i < 100; ++i) {
    CHECK(a.samples[i].domain == b.samples[i].domain);
    CHECK(a.samples[i].state == b.samples[i].state);
    distinct.insert(domain_to_json(a.samples[i].domain));
  }
  // Pruning can map two random draws to the same domain; most must still differ.
  CHECK(distinct.size() >= 95);
  CHECK(a.inputs.flat().size() == b.inputs.flat().size());
  CHECK(std::equal(a.inputs.flat().begin(), a.inputs.flat().end(), b.inputs.flat().begin()));
  CHECK(a.inputs.cols() == 153);

  auto abl = small_config(TrainMode::ablation_no_actions);
  std::mt19937_64 r3(5);
  CHECK(sample_batch(abl, r3, 10).inputs.cols() == 81);

  std::vector<PuzzleDomain> pool{make_fixed(3, DomainKind::diagonal)};
  std::mt19937_64 r4(2);
  for (const auto& s : sample_batch(cond, r4, 10, pool).samples) CHECK(s.domain == pool[0]);
}

TEST_CASE("walk lengths are uniform") {
  auto cfg = small_config(TrainMode::fixed_domain);
  cfg.max_scramble = 19;
  std::mt19937_64 rng(7);
  std::vector<double> counts(20, 0.0);
  const std::size_t total = 20000;
  for (int rep = 0; rep < 20; ++rep)
    for (const auto& s : sample_batch(cfg, rng, total / 20).samples) counts[s.walk_len] += 1;
  const double expected = static_cast<double>(total) / 20.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 19 degrees of freedom, upper 0.1% point 43.82
  CHECK(chi2 < 43.82);
}

TEST_CASE("compute targets") {
  const PuzzleDomain c2 = make_fixed(2, DomainKind::canonical);
  const std::vector<int> blank0{0, 1, 3, 2};
  const PuzzleState s(2, blank0);

  SUBCASE("goal is zero and a zero model gives one") {
    const auto zero = HeuristicModel::zeros({16, 8, 8, 1}, {2, false});
    const auto t = compute_targets(zero, batch_of(c2, {goal_state(2), s}, false));
    CHECK(t.values[0] == 0.0f);
    CHECK(t.values[1] == 1.0f);
    CHECK(t.dead_ends == 0);
  }
  SUBCASE("minimum over children") {
    // From blank at cell 0 the moves are D (to cell 2) and R (to cell 1).
    const auto m = blank_cell_model({0.0f, 5.0f, 3.0f, 0.0f});
    CHECK(m.forward_one(encode(c2, successor(s, Direction::D), false).values) == 3.0f);
    const auto t = compute_targets(m, batch_of(c2, {s}, false));
    CHECK(t.values[0] == 4.0f);
  }
  SUBCASE("negative estimates are clamped and goal children count as zero") {
    const auto m = blank_cell_model({-4.0f, -2.0f, 7.0f, 9.0f});
    const std::vector<int> near{1, 2, 0, 3};  // R reaches the goal
    const auto t = compute_targets(m, batch_of(c2, {s, PuzzleState(2, near)}, false));
    CHECK(t.values[0] == 1.0f);
    CHECK(t.values[1] == 1.0f);
  }
  SUBCASE("dead ends are skipped") {
    std::vector<DirectionSet> cells(4);
    const PuzzleDomain empty(2, cells);
    const auto zero = HeuristicModel::zeros({16, 4, 4, 0}, {2, false});
    const auto t = compute_targets(zero, batch_of(empty, {s, goal_state(2)}, false));
    CHECK(t.dead_ends == 1);
    CHECK_FALSE(t.valid[0]);
    CHECK(t.valid[1]);
  }
  SUBCASE("targets never exceed one plus the best child") {
    const auto cfg = small_config(TrainMode::action_conditioned);
    const auto model = HeuristicModel::init(cfg.model_config(), 3, {3, true});
    std::mt19937_64 rng(4);
    const Batch b = sample_batch(cfg, rng, 200);
    const auto t = compute_targets(model, b);
    for (std::size_t i = 0; i < b.samples.size(); ++i) {
      const Sample& smp = b.samples[i];
      if (!t.valid[i] || is_goal(smp.state)) continue;
      float best = std::numeric_limits<float>::infinity();
      smp.domain.actions_at(smp.state.blank()).for_each([&](Direction d) {
        const PuzzleState next = successor(smp.state, d);
        const float h = is_goal(next) ? 0.0f : std::max(0.0f, model.forward_one(encode(smp.domain, next, true).values));
        best = std::min(best, 1.0f + h);
      });
      CHECK(t.values[i] == doctest::Approx(best).epsilon(1e-5));
    }
  }
  SUBCASE("layout mismatch") {
    const auto wrong = HeuristicModel::zeros({153, 4, 4, 0});
    CHECK_THROWS_AS(compute_targets(wrong, batch_of(c2, {s}, false)), CorruptModel);
  }
}

TEST_CASE("train with no examples returns the initial model") {
  auto cfg = small_config(TrainMode::fixed_domain);
  cfg.total_examples = 0;
  cfg.seed = 9;
  const TrainResult r = train(cfg);
  CHECK(r.model == HeuristicModel::init(cfg.model_config(), derive_seed(9, 0), {3, true}));
  CHECK(r.report.steps == 0);
}

TEST_CASE("train learns the 2x2 canonical puzzle") {
  TrainConfig cfg = small_config(TrainMode::fixed_domain, 2);
  cfg.first_hidden = 400;
  cfg.block_width = 128;
  cfg.num_blocks = 2;
  cfg.max_scramble = 30;
  cfg.batch_size = 100;
  cfg.total_examples = 100'000;
  cfg.target_update_max_steps = 40;
  cfg.seed = 3;
  const TrainResult r = train(cfg);
  const PuzzleDomain d = make_fixed(2, DomainKind::canonical);
  const OracleTable table = backward_bfs(d);
  CHECK(table.size() == 12);
  double worst = 0.0;
  table.for_each([&](const PuzzleState& s, int cost) {
    worst = std::max(worst, std::abs(double(r.model.forward_one(encode(d, s, true).values)) - cost));
  });
  CHECK(worst < 0.5);
  CHECK(r.report.target_updates > 0);
  for (const auto& rec : r.report.curve) CHECK(std::isfinite(rec.loss));
}

TEST_CASE("training is deterministic in single-worker mode") {
  auto cfg = small_config(TrainMode::action_conditioned);
  cfg.total_examples = 3000;
  cfg.batch_size = 100;
  cfg.checkpoint_every = 5;
  cfg.target_update_max_steps = 7;
  cfg.seed = 21;
  const TrainResult a = train(cfg), b = train(cfg);
  CHECK(a.model == b.model);
  REQUIRE(a.report.curve.size() == b.report.curve.size());
  for (std::size_t i = 0; i < a.report.curve.size(); ++i) CHECK(a.report.curve[i].loss == b.report.curve[i].loss);
  CHECK(a.report.target_updates == b.report.target_updates);
  CHECK_FALSE(a.report.multi_worker);
  const std::string csv = train_log_csv(a.report);
  CHECK(csv.rfind("step,examples,loss,target_updates,wall_secs\n", 0) == 0);
  std::size_t sum = 0;
  for (auto c : a.report.walk_length_counts) sum += c;
  CHECK(sum == 3000);
}

TEST_CASE("config validation") {
  auto cfg = small_config(TrainMode::fixed_domain);
  cfg.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  cfg = small_config(TrainMode::fixed_domain);
  cfg.fixed_domain.n = 4;
  CHECK_THROWS_AS(cfg.validate(), DomainError);
  CHECK(parse_train_mode("ablation") == TrainMode::ablation_no_actions);
  CHECK_THROWS(parse_train_mode("other"));
}

TEST_CASE("tabular value iteration equals backward bfs") {
  std::vector<PuzzleDomain> domains;
  for (auto k : {DomainKind::canonical, DomainKind::diagonal, DomainKind::all}) domains.push_back(make_fixed(2, k));
  for (std::uint64_t s = 0; s < 6; ++s) domains.push_back(generate_random({2, DomainKind::random, s, 0.7}));
  domains.push_back(generate_random({3, DomainKind::random, 77, 0.6}));
  for (const auto& d : domains) {
    bool goal_pinned = true, monotone = true;
    std::vector<int> previous;
    const TabularResult vi = tabular_vi(d, 1000, kDefaultStateCap, [&](std::size_t, std::span<const int> values) {
      goal_pinned = goal_pinned && values[0] == 0;
      if (!previous.empty())
        for (std::size_t i = 0; i < values.size(); ++i) monotone = monotone && values[i] >= previous[i];
      previous.assign(values.begin(), values.end());
    });
    CHECK(vi.converged);
    CHECK(goal_pinned);
    CHECK(monotone);
    const OracleTable bfs = backward_bfs(d);
    CHECK(vi.values.entries() == bfs.entries());
    // Bellman fixpoint.
    vi.values.for_each([&](const PuzzleState& s, int v) {
      if (is_goal(s)) {
        CHECK(v == 0);
        return;
      }
      int best = 1 << 20;
      available_actions(d, s).for_each([&](Direction a) { best = std::min(best, 1 + *vi.values.cost(successor(s, a))); });
      CHECK(v == best);
    });
  }
  CHECK_THROWS_AS(tabular_vi(make_fixed(3, DomainKind::canonical), 100, 1000), CapacityError);
}
