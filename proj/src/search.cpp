#include "nphf/search.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "nphf/errors.hpp"

namespace nphf {

void ZeroHeuristic::evaluate(const PuzzleDomain&, std::span<const PuzzleState>, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
}

void OracleHeuristic::evaluate(const PuzzleDomain&, std::span<const PuzzleState> states,
                               std::span<double> out) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto c = table_->cost(states[i]);
    out[i] = c ? static_cast<double>(*c) : std::numeric_limits<double>::infinity();
  }
}

void RelaxHeuristic::evaluate(const PuzzleDomain& domain, std::span<const PuzzleState> states,
                              std::span<double> out) const {
  const RelaxedCellGraph graph(domain);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const auto c = graph.lower_bound(states[i]);
    out[i] = c ? static_cast<double>(*c) : std::numeric_limits<double>::infinity();
  }
}

void ModelHeuristic::evaluate(const PuzzleDomain& domain, std::span<const PuzzleState> states,
                              std::span<double> out) const {
  if (states.empty()) return;
  const bool with_actions = model_->layout().with_actions;
  const std::size_t dim = encoded_size(domain.n(), with_actions);
  require_input_dim(*model_, dim);
  kernels::Matrix<float> x(states.size(), dim);
  for (std::size_t i = 0; i < states.size(); ++i)
    encode_into<float>(domain, states[i], with_actions, {x.data() + i * dim, dim});
  const std::vector<float> h = model_->forward(x.cref());
  for (std::size_t i = 0; i < states.size(); ++i) out[i] = h[i];
}

void SearchConfig::validate() const {
  if (!(weight > 0.0 && weight <= 1.0)) throw DomainError("search weight must lie in (0, 1]");
  if (batch_size < 1) throw DomainError("search batch size must be at least 1");
}

namespace {

struct Node {
  PuzzleState state;
  std::uint32_t parent;
  Direction action;
  int g;
};

struct OpenEntry {
  double f;
  int g;
  std::uint64_t seq;
  std::uint32_t node;
};

struct LowerPriority {
  bool operator()(const OpenEntry& a, const OpenEntry& b) const {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.seq > b.seq;
  }
};

constexpr std::uint32_t kNoParent = std::numeric_limits<std::uint32_t>::max();

}  // namespace

SearchResult solve(const PuzzleDomain& domain, const PuzzleState& start, const HeuristicProvider& heuristic,
                   const SearchConfig& config) {
  config.validate();
  if (start.n() != domain.n()) throw InvalidState("start state dimension differs from the domain");
  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] { return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); };
  SearchResult result;
  auto finish = [&]() -> SearchResult& {
    result.wall_secs = elapsed();
    result.nodes_per_sec = result.wall_secs > 0 ? static_cast<double>(result.nodes_generated) / result.wall_secs : 0.0;
    return result;
  };
  if (is_goal(start)) {
    result.solved = true;
    return finish();
  }

  std::vector<Node> nodes;
  std::unordered_map<StateKey, std::uint32_t, StateKeyHash> best;  // state → live node
  std::priority_queue<OpenEntry, std::vector<OpenEntry>, LowerPriority> open;
  std::uint64_t seq = 0;

  double h_start = 0.0;
  heuristic.evaluate(domain, std::span<const PuzzleState>(&start, 1), std::span<double>(&h_start, 1));
  if (std::isinf(h_start)) return finish();
  nodes.push_back({start, kNoParent, Direction::U, 0});
  best.emplace(pack(start), 0);
  open.push({std::max(h_start, 0.0), 0, seq++, 0});

  std::vector<std::uint32_t> popped;
  std::vector<std::uint32_t> fresh;
  std::vector<PuzzleState> to_score;
  std::vector<std::uint32_t> to_score_node;
  std::vector<double> scores;
  std::optional<std::uint32_t> goal_node;

  while (!open.empty()) {
    if (elapsed() > config.time_limit_secs || result.nodes_generated > config.node_limit) return finish();
    ++result.iterations;
    popped.clear();
    while (!open.empty() && popped.size() < config.batch_size) {
      const OpenEntry top = open.top();
      const Node& node = nodes[top.node];
      if (best.at(pack(node.state)) != top.node) {  // superseded by a cheaper path
        open.pop();
        continue;
      }
      if (is_goal(node.state)) {
        if (popped.empty()) goal_node = top.node;
        break;  // a later goal stays queued until everything ahead of it is expanded
      }
      open.pop();
      popped.push_back(top.node);
    }
    if (goal_node) break;

    fresh.clear();
    to_score.clear();
    to_score_node.clear();
    for (std::uint32_t id : popped) {
      ++result.nodes_expanded;
      const PuzzleState parent_state = nodes[id].state;
      const int g = nodes[id].g + 1;
      domain.actions_at(parent_state.blank()).for_each([&](Direction d) {
        ++result.nodes_generated;
        PuzzleState child = successor(parent_state, d);
        const StateKey key = pack(child);
        const auto it = best.find(key);
        if (it != best.end() && nodes[it->second].g <= g) return;
        const auto child_id = static_cast<std::uint32_t>(nodes.size());
        nodes.push_back({child, id, d, g});
        if (it != best.end()) {
          it->second = child_id;
        } else {
          best.emplace(key, child_id);
        }
        fresh.push_back(child_id);
        if (!is_goal(child)) {
          to_score.push_back(child);
          to_score_node.push_back(child_id);
        }
      });
    }
    scores.assign(to_score.size(), 0.0);
    if (!to_score.empty()) heuristic.evaluate(domain, to_score, scores);
    std::size_t scored = 0;
    for (std::uint32_t id : fresh) {
      double h = 0.0;
      if (scored < to_score_node.size() && to_score_node[scored] == id) h = scores[scored++];
      if (std::isinf(h)) continue;
      const Node& node = nodes[id];
      open.push({config.weight * node.g + std::max(h, 0.0), node.g, seq++, id});
    }
  }
  if (!goal_node) return finish();

  for (std::uint32_t id = *goal_node; nodes[id].parent != kNoParent; id = nodes[id].parent)
    result.path.push_back(nodes[id].action);
  std::reverse(result.path.begin(), result.path.end());
  PuzzleState replay = start;
  double cost = 0.0;
  for (Direction d : result.path) {
    const Transition t = apply_action(domain, replay, d);
    replay = t.state;
    cost += t.cost;
  }
  if (!is_goal(replay) || cost != static_cast<double>(nodes[*goal_node].g))
    throw std::logic_error("search produced a path that does not replay to the goal");
  result.solved = true;
  result.cost = cost;
  return finish();
}

SuiteReport solve_suite(std::span<const SuiteInstance> instances, const HeuristicProvider& heuristic,
                        const SearchConfig& config, std::string domain_label, std::string solver_label) {
  SuiteReport report;
  report.rows.resize(instances.size());
  std::vector<SearchResult> results(instances.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < instances.size(); ++i)
    results[i] = solve(*instances[i].domain, instances[i].start, heuristic, config);

  BenchmarkSummary& s = report.summary;
  s.domain_label = std::move(domain_label);
  s.solver_label = std::move(solver_label);
  s.instances = instances.size();
  std::size_t solved = 0;
  std::size_t opt_known = 0;
  std::size_t opt_hit = 0;
  double total_nodes = 0.0;
  double total_secs = 0.0;
  double total_len = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const SearchResult& r = results[i];
    report.rows[i] = {instances[i].id, r.solved, r.cost, instances[i].optimal_cost, r.nodes_generated, r.wall_secs};
    total_nodes += static_cast<double>(r.nodes_generated);
    total_secs += r.wall_secs;
    if (!r.solved) continue;
    ++solved;
    total_len += r.cost;
    if (instances[i].optimal_cost) {
      ++opt_known;
      if (r.cost == static_cast<double>(*instances[i].optimal_cost)) ++opt_hit;
    } else {
      ++s.opt_unknown;
    }
  }
  const double count = static_cast<double>(std::max<std::size_t>(instances.size(), 1));
  s.len = solved ? total_len / static_cast<double>(solved) : 0.0;
  s.opt_pct = opt_known ? 100.0 * static_cast<double>(opt_hit) / static_cast<double>(opt_known) : 0.0;
  s.nodes = total_nodes / count;
  s.secs = total_secs / count;
  s.nodes_per_sec = total_secs > 0 ? total_nodes / total_secs : 0.0;
  s.solved_pct = 100.0 * static_cast<double>(solved) / count;
  return report;
}

std::string results_csv(std::span<const SuiteRow> rows, bool include_secs) {
  std::string out = "instance_id,solved,cost,optimal_cost,nodes,secs\n";
  char buf[64];
  for (const SuiteRow& r : rows) {
    out += r.instance_id;
    out += r.solved ? ",1," : ",0,";
    if (r.solved) {
      std::snprintf(buf, sizeof(buf), "%.17g", r.cost);
      out += buf;
    }
    out += ',';
    if (r.optimal_cost) out += std::to_string(*r.optimal_cost);
    out += ',';
    out += std::to_string(r.nodes);
    out += ',';
    if (include_secs) {
      std::snprintf(buf, sizeof(buf), "%.6f", r.secs);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

std::string benchmark_csv(std::span<const BenchmarkSummary> summaries) {
  std::string out = "Domain,Solver,Len,Opt,Nodes,Secs,Nodes/Sec,Solved\n";
  char buf[256];
  for (const BenchmarkSummary& s : summaries) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%.2f,%.2f%%,%.3e,%.3f,%.3e,%.2f%%\n", s.domain_label.c_str(),
                  s.solver_label.c_str(), s.len, s.opt_pct, s.nodes, s.secs, s.nodes_per_sec, s.solved_pct);
    out += buf;
  }
  return out;
}

}  // namespace nphf
