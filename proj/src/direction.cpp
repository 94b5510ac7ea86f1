#include "nphf/puzzle.hpp"

namespace nphf {

namespace {
constexpr std::array<std::string_view, kNumDirections> kNames = {"U",  "D",  "L",  "R",
                                                                 "UL", "UR", "DL", "DR"};
}

std::string_view name(Direction d) { return kNames[static_cast<std::size_t>(index(d))]; }

std::optional<Direction> parse_direction(std::string_view s) {
  for (Direction d : kAllDirections)
    if (kNames[static_cast<std::size_t>(index(d))] == s) return d;
  return std::nullopt;
}

std::vector<Direction> DirectionSet::to_vector() const {
  std::vector<Direction> out;
  for_each([&](Direction d) { out.push_back(d); });
  return out;
}

std::optional<int> target_cell(int n, int cell, Direction d) {
  const Offset o = offset(d);
  const int row = cell / n + o.drow;
  const int col = cell % n + o.dcol;
  if (row < 0 || row >= n || col < 0 || col >= n) return std::nullopt;
  return row * n + col;
}

DirectionSet in_grid(int n, int cell, DirectionSet candidates) {
  DirectionSet out;
  candidates.for_each([&](Direction d) {
    if (target_cell(n, cell, d)) out.insert(d);
  });
  return out;
}

}  // namespace nphf
