#include "nphf/puzzle.hpp"

#include <sstream>

#include "nphf/errors.hpp"

namespace nphf {

namespace {

void check_dimension(int n) {
  if (n < 2 || n > kMaxDim)
    throw InvalidDimension("grid dimension must be in [2, " + std::to_string(kMaxDim) +
                           "], got " + std::to_string(n));
}

}  // namespace

PuzzleDomain::PuzzleDomain(int n, std::vector<DirectionSet> cells) : n_(n), cells_(std::move(cells)) {
  check_dimension(n);
  if (cells_.size() != static_cast<std::size_t>(n * n))
    throw InvalidDomain("expected " + std::to_string(n * n) + " cells, got " +
                        std::to_string(cells_.size()));
  for (int c = 0; c < n * n; ++c) {
    if (!actions_at(c).is_subset_of(in_grid(n, c)))
      throw InvalidDomain("cell " + std::to_string(c) + " stores an off-grid direction");
  }
}

bool PuzzleDomain::is_reversible() const {
  for (int c = 0; c < num_cells(); ++c) {
    bool ok = true;
    actions_at(c).for_each([&](Direction d) {
      if (!actions_at(*target_cell(n_, c, d)).contains(reverse(d))) ok = false;
    });
    if (!ok) return false;
  }
  return true;
}

DirectionSet PuzzleDomain::union_of_actions() const {
  std::uint8_t bits = 0;
  for (DirectionSet s : cells_) bits |= s.bits();
  return DirectionSet(bits);
}

PuzzleState::PuzzleState(int n, std::span<const int> tiles) : n_(static_cast<std::uint8_t>(n)) {
  check_dimension(n);
  const int cells = n * n;
  if (tiles.size() != static_cast<std::size_t>(cells))
    throw InvalidState("expected " + std::to_string(cells) + " tiles, got " +
                       std::to_string(tiles.size()));
  std::array<bool, kMaxCells> seen{};
  for (int c = 0; c < cells; ++c) {
    const int t = tiles[static_cast<std::size_t>(c)];
    if (t < 0 || t >= cells || seen[static_cast<std::size_t>(t)])
      throw InvalidState("tiles are not a permutation of 0.." + std::to_string(cells - 1));
    seen[static_cast<std::size_t>(t)] = true;
    tiles_[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(t);
    if (t == 0) blank_ = static_cast<std::uint8_t>(c);
  }
}

std::vector<int> PuzzleState::tile_vector() const { return {tiles().begin(), tiles().end()}; }

void PuzzleState::swap_blank_with(int cell) {
  tiles_[blank_] = tiles_[static_cast<std::size_t>(cell)];
  tiles_[static_cast<std::size_t>(cell)] = 0;
  blank_ = static_cast<std::uint8_t>(cell);
}

PuzzleState goal_state(int n) {
  check_dimension(n);
  PuzzleState s;
  s.n_ = static_cast<std::uint8_t>(n);
  const int cells = n * n;
  for (int c = 0; c < cells - 1; ++c) s.tiles_[static_cast<std::size_t>(c)] = static_cast<std::uint8_t>(c + 1);
  s.tiles_[static_cast<std::size_t>(cells - 1)] = 0;
  s.blank_ = static_cast<std::uint8_t>(cells - 1);
  return s;
}

bool is_goal(const PuzzleState& state) {
  const int cells = state.num_cells();
  if (state.blank() != cells - 1) return false;
  for (int c = 0; c < cells - 1; ++c)
    if (state.tile(c) != c + 1) return false;
  return true;
}

DirectionSet available_actions(const PuzzleDomain& domain, const PuzzleState& state) {
  return domain.actions_at(state.blank());
}

PuzzleState successor(const PuzzleState& state, Direction d) {
  const Offset o = offset(d);
  PuzzleState next = state;
  next.swap_blank_with(state.blank() + o.drow * state.n() + o.dcol);
  return next;
}

Transition apply_action(const PuzzleDomain& domain, const PuzzleState& state, Direction d) {
  if (state.n() != domain.n()) throw InvalidState("state and domain dimensions differ");
  if (!target_cell(state.n(), state.blank(), d))
    throw IllegalAction("move " + std::string(name(d)) + " leaves the grid from cell " +
                        std::to_string(state.blank()));
  if (!domain.actions_at(state.blank()).contains(d))
    throw IllegalAction("move " + std::string(name(d)) + " is not permitted at cell " +
                        std::to_string(state.blank()));
  return {successor(state, d), 1.0};
}

PuzzleState random_walk(const PuzzleDomain& domain, std::size_t steps, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PuzzleState state = goal_state(domain.n());
  random_walk_from(domain, state, steps, rng);
  return state;
}

std::size_t state_block_size(int n) { return static_cast<std::size_t>(n * n * n * n); }
std::size_t domain_block_size(int n) { return static_cast<std::size_t>(n * n * kNumDirections); }
std::size_t encoded_size(int n, bool with_actions) {
  return state_block_size(n) + (with_actions ? domain_block_size(n) : 0);
}

EncodedInput encode(const PuzzleDomain& domain, const PuzzleState& state, bool with_actions) {
  EncodedInput in;
  in.values.resize(encoded_size(state.n(), with_actions));
  encode_into<float>(domain, state, with_actions, in.values);
  return in;
}

std::string to_text(const PuzzleState& state) {
  std::string out;
  for (int c = 0; c < state.num_cells(); ++c) {
    if (c) out += ' ';
    out += std::to_string(state.tile(c));
  }
  return out;
}

PuzzleState parse_state(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<int> tiles;
  int t = 0;
  while (in >> t) tiles.push_back(t);
  if (!in.eof()) throw InvalidState("state text must be space-separated integers");
  int n = 2;
  while (n * n < static_cast<int>(tiles.size())) ++n;
  if (n * n != static_cast<int>(tiles.size()))
    throw InvalidState("tile count " + std::to_string(tiles.size()) + " is not a square");
  return PuzzleState(n, tiles);
}

StateKey pack(const PuzzleState& state) {
  StateKey key;
  // The last cell is implied by the permutation, leaving 24 cells of 5 bits at most.
  const int cells = state.num_cells() - 1;
  for (int c = 0; c < cells; ++c) {
    const std::uint64_t t = state.tile(c);
    const int bit = c * 5;
    if (bit < 60) {
      key.lo |= t << bit;
    } else {
      key.hi |= t << (bit - 60);
    }
  }
  return key;
}

}  // namespace nphf
