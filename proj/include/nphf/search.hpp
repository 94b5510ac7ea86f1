#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nphf/model.hpp"
#include "nphf/oracle.hpp"
#include "nphf/puzzle.hpp"

namespace nphf {

/// Batched cost-to-go estimates. Implementations must tolerate concurrent calls.
class HeuristicProvider {
 public:
  virtual ~HeuristicProvider() = default;
  virtual void evaluate(const PuzzleDomain& domain, std::span<const PuzzleState> states,
                        std::span<double> out) const = 0;
  virtual std::string name() const = 0;
};

class ZeroHeuristic final : public HeuristicProvider {
 public:
  void evaluate(const PuzzleDomain&, std::span<const PuzzleState>, std::span<double> out) const override;
  std::string name() const override { return "zero"; }
};

/// Exact table lookup; states missing from the table get +infinity.
class OracleHeuristic final : public HeuristicProvider {
 public:
  explicit OracleHeuristic(const OracleTable& table) : table_(&table) {}
  void evaluate(const PuzzleDomain&, std::span<const PuzzleState> states, std::span<double> out) const override;
  std::string name() const override { return "oracle"; }

 private:
  const OracleTable* table_;
};

/// Relaxed tile-graph lower bound; +infinity where a tile cannot reach its goal cell.
class RelaxHeuristic final : public HeuristicProvider {
 public:
  void evaluate(const PuzzleDomain& domain, std::span<const PuzzleState> states,
                std::span<double> out) const override;
  std::string name() const override { return "relax"; }
};

/// Learned h(s, va), or h(s) for models trained without action information.
class ModelHeuristic final : public HeuristicProvider {
 public:
  explicit ModelHeuristic(const HeuristicModel& model) : model_(&model) {}
  void evaluate(const PuzzleDomain& domain, std::span<const PuzzleState> states,
                std::span<double> out) const override;
  std::string name() const override { return "model"; }

 private:
  const HeuristicModel* model_;
};

struct SearchConfig {
  double weight = 0.8;  // f = weight·g + h
  std::size_t batch_size = 1000;
  double time_limit_secs = 200.0;
  std::size_t node_limit = 20'000'000;

  void validate() const;
};

struct SearchResult {
  bool solved = false;
  std::vector<Direction> path;
  double cost = 0.0;
  std::size_t nodes_generated = 0;
  std::size_t nodes_expanded = 0;
  std::size_t iterations = 0;
  double wall_secs = 0.0;
  double nodes_per_sec = 0.0;
};

/// Batched weighted A*. Each iteration pops up to batch_size open nodes in priority order
/// (lower f, then larger g, then insertion order) and evaluates all their new children in
/// one heuristic call. A popped goal ends the search only when it is the first node of its
/// iteration; otherwise it is re-queued so the nodes ahead of it are expanded first.
/// Cheaper paths reopen closed states. Throws InvalidState for a start that does not
/// match the domain.
SearchResult solve(const PuzzleDomain& domain, const PuzzleState& start, const HeuristicProvider& heuristic,
                   const SearchConfig& config);

struct SuiteInstance {
  std::string id;
  const PuzzleDomain* domain;
  PuzzleState start;
  std::optional<int> optimal_cost;
};

struct SuiteRow {
  std::string instance_id;
  bool solved;
  double cost;
  std::optional<int> optimal_cost;
  std::size_t nodes;
  double secs;
};

/// Table-style aggregate over one suite.
struct BenchmarkSummary {
  std::string domain_label;
  std::string solver_label;
  double len = 0.0;      // mean cost over solved instances
  double opt_pct = 0.0;  // % of solved instances with a known optimum that hit it
  double nodes = 0.0;    // mean nodes generated
  double secs = 0.0;     // mean wall time
  double nodes_per_sec = 0.0;
  double solved_pct = 0.0;
  std::size_t instances = 0;
  std::size_t opt_unknown = 0;  // solved instances excluded from Opt
};

struct SuiteReport {
  std::vector<SuiteRow> rows;
  BenchmarkSummary summary;
};

SuiteReport solve_suite(std::span<const SuiteInstance> instances, const HeuristicProvider& heuristic,
                        const SearchConfig& config, std::string domain_label = "",
                        std::string solver_label = "");

/// instance_id,solved,cost,optimal_cost,nodes,secs
std::string results_csv(std::span<const SuiteRow> rows, bool include_secs = true);
/// Domain,Solver,Len,Opt,Nodes,Secs,Nodes/Sec,Solved
std::string benchmark_csv(std::span<const BenchmarkSummary> summaries);

}  // namespace nphf
