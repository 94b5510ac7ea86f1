#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nphf/puzzle.hpp"

namespace nphf {

inline constexpr std::size_t kDefaultStateCap = 2'000'000;
inline constexpr std::uint16_t kUnreached = 0xFFFF;

/// Lexicographic rank of the tile permutation, valid for n ≤ 4.
std::uint64_t permutation_rank(const PuzzleState& state);
PuzzleState permutation_unrank(int n, std::uint64_t rank);

/// Exact cost-to-go of every state in the goal's component.
class OracleTable {
 public:
  explicit OracleTable(PuzzleDomain domain);

  const PuzzleDomain& domain() const { return domain_; }
  std::size_t size() const { return size_; }

  /// nullopt when the state is outside the goal component.
  std::optional<int> cost(const PuzzleState& state) const;
  bool contains(const PuzzleState& state) const { return cost(state).has_value(); }

  /// Returns false if the state was already present.
  bool insert(const PuzzleState& state, int cost);

  /// (rank, cost) pairs sorted by rank; n ≤ 4 only.
  std::vector<std::pair<std::uint64_t, std::uint16_t>> entries() const;

  /// Calls f(state, cost) for every entry, in ascending rank order for n ≤ 4.
  template <class F>
  void for_each(F&& f) const;

 private:
  PuzzleDomain domain_;
  std::size_t size_ = 0;
  std::vector<std::uint16_t> dense_;  // indexed by rank, n ≤ 3
  std::unordered_map<StateKey, std::uint16_t, StateKeyHash> sparse_;
  StateKey key_of(const PuzzleState& s) const;
};

/// Breadth-first search from the goal. Requires a reversible domain, so backward and
/// forward distances coincide. Throws CapacityError once more than `cap` states are reached.
OracleTable backward_bfs(const PuzzleDomain& domain, std::size_t cap = kDefaultStateCap);

/// Shortest cell-to-cell distances in the relaxed tile graph: edge i→j iff some direction
/// stored anywhere in the domain leads from i to j.
class RelaxedCellGraph {
 public:
  explicit RelaxedCellGraph(const PuzzleDomain& domain);
  /// Max over non-blank tiles of the distance to the goal cell; nullopt if some tile
  /// cannot reach its goal cell at all.
  std::optional<int> lower_bound(const PuzzleState& state) const;

 private:
  int cells_;
  std::vector<int> dist_;  // cells × cells, -1 = disconnected
};

std::optional<int> relax_heuristic(const PuzzleDomain& domain, const PuzzleState& state);

struct ExactCost {
  enum class Status { solved, unreachable, budget_exceeded };
  Status status = Status::solved;
  int cost = 0;
  std::size_t expanded = 0;
};

/// A* to the goal under relax_heuristic (consistent, so the first goal popped is optimal).
ExactCost exact_cost(const PuzzleDomain& domain, const PuzzleState& state, std::size_t node_budget);

// Dump: "NPORACL1", u32 LE length + domain JSON, then (u64 LE rank, u16 LE cost) pairs
// sorted by rank until end of file.
void save_oracle(const OracleTable& table, const std::filesystem::path& path);
OracleTable load_oracle(const std::filesystem::path& path);

template <class F>
void OracleTable::for_each(F&& f) const {
  const int n = domain_.n();
  if (n <= 3) {
    for (std::size_t r = 0; r < dense_.size(); ++r)
      if (dense_[r] != kUnreached) f(permutation_unrank(n, r), static_cast<int>(dense_[r]));
    return;
  }
  if (n == 4) {
    for (const auto& [rank, c] : entries()) f(permutation_unrank(n, rank), static_cast<int>(c));
    return;
  }
  for (const auto& [key, c] : sparse_) {
    std::vector<int> tiles(static_cast<std::size_t>(n * n));
    std::vector<bool> used(tiles.size(), false);
    for (int cell = 0; cell + 1 < n * n; ++cell) {
      const int bit = cell * 5;
      const std::uint64_t word = bit < 60 ? key.lo >> bit : key.hi >> (bit - 60);
      tiles[static_cast<std::size_t>(cell)] = static_cast<int>(word & 31U);
      used[static_cast<std::size_t>(tiles[static_cast<std::size_t>(cell)])] = true;
    }
    for (std::size_t t = 0; t < used.size(); ++t)
      if (!used[t]) tiles.back() = static_cast<int>(t);
    f(PuzzleState(n, tiles), static_cast<int>(c));
  }
}

}  // namespace nphf
