#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nphf {

inline constexpr int kMaxDim = 5;
inline constexpr int kMaxCells = kMaxDim * kMaxDim;
inline constexpr int kNumDirections = 8;

// Direction the BLANK moves in. The tile that slides moves the opposite way.
enum class Direction : std::uint8_t { U = 0, D, L, R, UL, UR, DL, DR };

inline constexpr std::array<Direction, kNumDirections> kAllDirections = {
    Direction::U,  Direction::D,  Direction::L,  Direction::R,
    Direction::UL, Direction::UR, Direction::DL, Direction::DR};

struct Offset {
  int drow;
  int dcol;
  friend constexpr bool operator==(Offset, Offset) = default;
};

constexpr int index(Direction d) { return static_cast<int>(d); }

constexpr Offset offset(Direction d) {
  constexpr std::array<Offset, kNumDirections> table = {
      Offset{-1, 0}, Offset{1, 0},  Offset{0, -1}, Offset{0, 1},
      Offset{-1, -1}, Offset{-1, 1}, Offset{1, -1}, Offset{1, 1}};
  return table[index(d)];
}

constexpr Direction reverse(Direction d) {
  constexpr std::array<Direction, kNumDirections> table = {
      Direction::D,  Direction::U,  Direction::R,  Direction::L,
      Direction::DR, Direction::DL, Direction::UR, Direction::UL};
  return table[index(d)];
}

std::string_view name(Direction d);
std::optional<Direction> parse_direction(std::string_view s);

/// Bitmask over the eight directions, bit i = direction with index i.
class DirectionSet {
 public:
  constexpr DirectionSet() = default;
  constexpr explicit DirectionSet(std::uint8_t bits) : bits_(bits) {}
  constexpr DirectionSet(std::initializer_list<Direction> dirs) {
    for (Direction d : dirs) insert(d);
  }

  constexpr bool contains(Direction d) const { return (bits_ >> index(d)) & 1U; }
  constexpr void insert(Direction d) { bits_ |= static_cast<std::uint8_t>(1U << index(d)); }
  constexpr void erase(Direction d) { bits_ &= static_cast<std::uint8_t>(~(1U << index(d))); }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr int size() const { return __builtin_popcount(bits_); }
  constexpr std::uint8_t bits() const { return bits_; }
  constexpr bool is_subset_of(DirectionSet other) const { return (bits_ & ~other.bits_) == 0; }

  // Directions in index order.
  std::vector<Direction> to_vector() const;

  template <class F>
  constexpr void for_each(F&& f) const {
    for (Direction d : kAllDirections)
      if (contains(d)) f(d);
  }

  friend constexpr bool operator==(DirectionSet, DirectionSet) = default;

 private:
  std::uint8_t bits_ = 0;
};

inline constexpr DirectionSet kCanonical{Direction::U, Direction::D, Direction::L, Direction::R};
inline constexpr DirectionSet kDiagonal{Direction::UL, Direction::UR, Direction::DL, Direction::DR};
inline constexpr DirectionSet kEveryDirection{static_cast<std::uint8_t>(0xFF)};

/// Cell reached from `cell` by moving in `d` on an n×n grid, or nullopt when off-grid.
std::optional<int> target_cell(int n, int cell, Direction d);

/// Directions of `candidates` that stay on the grid from `cell`.
DirectionSet in_grid(int n, int cell, DirectionSet candidates = kEveryDirection);

/// Grid dimension plus the per-cell sets of permitted blank moves.
class PuzzleDomain {
 public:
  /// Throws InvalidDimension for n outside [2, kMaxDim] and InvalidDomain when the
  /// cell count is wrong or a stored direction leaves the grid.
  PuzzleDomain(int n, std::vector<DirectionSet> cells);

  int n() const { return n_; }
  int num_cells() const { return n_ * n_; }
  DirectionSet actions_at(int cell) const { return cells_[static_cast<std::size_t>(cell)]; }
  std::span<const DirectionSet> cells() const { return cells_; }

  /// True when every stored move has its reverse stored at the target cell.
  bool is_reversible() const;
  /// Every direction stored anywhere in the domain.
  DirectionSet union_of_actions() const;

  friend bool operator==(const PuzzleDomain&, const PuzzleDomain&) = default;

 private:
  int n_;
  std::vector<DirectionSet> cells_;
};

/// Tile permutation with the blank (tile 0) position cached.
class PuzzleState {
 public:
  /// Throws InvalidDimension or InvalidState unless `tiles` is a permutation of 0..n²-1.
  PuzzleState(int n, std::span<const int> tiles);

  int n() const { return n_; }
  int num_cells() const { return n_ * n_; }
  int blank() const { return blank_; }
  int tile(int cell) const { return tiles_[static_cast<std::size_t>(cell)]; }
  std::span<const std::uint8_t> tiles() const {
    return {tiles_.data(), static_cast<std::size_t>(n_ * n_)};
  }
  std::vector<int> tile_vector() const;

  /// Swaps the blank with the tile at `cell`; the caller guarantees adjacency.
  void swap_blank_with(int cell);

  friend bool operator==(const PuzzleState&, const PuzzleState&) = default;

 private:
  PuzzleState() = default;
  friend PuzzleState goal_state(int n);

  std::uint8_t n_ = 0;
  std::uint8_t blank_ = 0;
  std::array<std::uint8_t, kMaxCells> tiles_{};
};

struct Transition {
  PuzzleState state;
  double cost;
};

PuzzleState goal_state(int n);
bool is_goal(const PuzzleState& state);

DirectionSet available_actions(const PuzzleDomain& domain, const PuzzleState& state);

/// Pure transition. Throws IllegalAction if `d` is not permitted at the blank's cell.
Transition apply_action(const PuzzleDomain& domain, const PuzzleState& state, Direction d);

/// Same as apply_action without the legality check; `d` must be in available_actions.
PuzzleState successor(const PuzzleState& state, Direction d);

/// Walk of `steps` uniformly random permitted moves from the goal, stopping early at a
/// cell with no permitted move.
PuzzleState random_walk(const PuzzleDomain& domain, std::size_t steps, std::uint64_t seed);

/// Walk driven by a caller-owned engine; returns the number of moves actually made.
template <class Rng>
std::size_t random_walk_from(const PuzzleDomain& domain, PuzzleState& state, std::size_t steps,
                             Rng& rng);

// Encoded network input: n²·n² state one-hot, then (optionally) n²·8 domain indicators.
std::size_t state_block_size(int n);
std::size_t domain_block_size(int n);
std::size_t encoded_size(int n, bool with_actions);

/// Writes the encoding into `out` (size encoded_size), overwriting every entry.
template <class T>
void encode_into(const PuzzleDomain& domain, const PuzzleState& state, bool with_actions,
                 std::span<T> out);

struct EncodedInput {
  std::vector<float> values;
};

EncodedInput encode(const PuzzleDomain& domain, const PuzzleState& state, bool with_actions);

std::string to_text(const PuzzleState& state);
/// Parses space-separated row-major tiles; n is inferred from the count.
PuzzleState parse_state(std::string_view text);

/// Packed 128-bit state key (5 bits per tile) for hashing in search structures.
struct StateKey {
  std::uint64_t lo = 0;
  std::uint64_t hi = 0;
  friend bool operator==(const StateKey&, const StateKey&) = default;
};

StateKey pack(const PuzzleState& state);

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const noexcept {
    std::uint64_t h = k.lo * 0x9E3779B97F4A7C15ULL;
    h ^= (k.hi + 0x632BE59BD9B4E019ULL) * 0xC2B2AE3D27D4EB4FULL;
    h ^= h >> 29;
    return static_cast<std::size_t>(h);
  }
};

// ---- template definitions ----

template <class Rng>
std::size_t random_walk_from(const PuzzleDomain& domain, PuzzleState& state, std::size_t steps,
                             Rng& rng) {
  std::array<Direction, kNumDirections> options{};
  for (std::size_t step = 0; step < steps; ++step) {
    int count = 0;
    domain.actions_at(state.blank()).for_each([&](Direction d) { options[count++] = d; });
    if (count == 0) return step;
    std::uniform_int_distribution<int> pick(0, count - 1);
    state = successor(state, options[static_cast<std::size_t>(pick(rng))]);
  }
  return steps;
}

template <class T>
void encode_into(const PuzzleDomain& domain, const PuzzleState& state, bool with_actions,
                 std::span<T> out) {
  const int cells = state.num_cells();
  std::fill(out.begin(), out.end(), T{0});
  for (int c = 0; c < cells; ++c) out[static_cast<std::size_t>(c * cells + state.tile(c))] = T{1};
  if (!with_actions) return;
  const std::size_t base = static_cast<std::size_t>(cells * cells);
  for (int c = 0; c < cells; ++c) {
    domain.actions_at(c).for_each([&](Direction d) {
      out[base + static_cast<std::size_t>(c * kNumDirections + index(d))] = T{1};
    });
  }
}

}  // namespace nphf
