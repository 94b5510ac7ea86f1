#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "nphf/domain_gen.hpp"
#include "nphf/domain_io.hpp"
#include "nphf/errors.hpp"
#include "nphf/oracle.hpp"
#include "nphf/puzzle.hpp"

using namespace nphf;

namespace {

PuzzleState state_of(std::initializer_list<int> tiles) {
  std::vector<int> v(tiles);
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(v.size()))));
  return PuzzleState(n, v);
}

PuzzleDomain empty_domain(int n) { return PuzzleDomain(n, std::vector<DirectionSet>(n * n)); }

}  // namespace

TEST_CASE("direction reverse pairs and offsets") {
  for (Direction d : kAllDirections) {
    CHECK(reverse(reverse(d)) == d);
    CHECK(offset(reverse(d)).drow == -offset(d).drow);
    CHECK(offset(reverse(d)).dcol == -offset(d).dcol);
    CHECK(parse_direction(name(d)) == d);
  }
  CHECK(reverse(Direction::U) == Direction::D);
  CHECK(reverse(Direction::L) == Direction::R);
  CHECK(reverse(Direction::UL) == Direction::DR);
  CHECK(reverse(Direction::UR) == Direction::DL);
  CHECK_FALSE(parse_direction("X").has_value());
  CHECK(index(Direction::DR) == 7);
}

TEST_CASE("goal state") {
  const PuzzleState g2 = goal_state(2);
  CHECK(g2.tile_vector() == std::vector<int>{1, 2, 3, 0});
  CHECK(g2.blank() == 3);
  const PuzzleState g3 = goal_state(3);
  CHECK(g3.tile_vector() == std::vector<int>{1, 2, 3, 4, 5, 6, 7, 8, 0});
  CHECK(g3.blank() == 8);
  CHECK(is_goal(g3));
  CHECK_THROWS_AS(goal_state(1), InvalidDimension);
  CHECK_THROWS_AS(goal_state(6), InvalidDimension);
}

TEST_CASE("state validation") {
  CHECK_THROWS_AS(state_of({1, 2, 3, 3}), InvalidState);
  CHECK_THROWS_AS(state_of({1, 2, 3, 4}), InvalidState);
  CHECK_THROWS_AS(PuzzleState(3, std::vector<int>{0, 1, 2}), InvalidState);
  CHECK_THROWS_AS(parse_state("1 2 3"), InvalidState);
  CHECK_THROWS_AS(parse_state("1 2 x 0"), InvalidState);
  const PuzzleState s = parse_state("1 0 3 2");
  CHECK(s.blank() == 1);
  CHECK(to_text(s) == "1 0 3 2");
}

TEST_CASE("domain validation") {
  std::vector<DirectionSet> cells(4);
  cells[0] = DirectionSet{Direction::U};
  CHECK_THROWS_AS(PuzzleDomain(2, cells), InvalidDomain);
  CHECK_THROWS_AS(PuzzleDomain(2, std::vector<DirectionSet>(3)), InvalidDomain);
  CHECK_THROWS_AS(PuzzleDomain(1, std::vector<DirectionSet>(1)), InvalidDimension);
}

TEST_CASE("available actions") {
  const PuzzleDomain all = make_fixed(3, DomainKind::all);
  CHECK(available_actions(all, state_of({1, 2, 3, 4, 0, 5, 6, 7, 8})).size() == 8);
  const PuzzleDomain c = make_fixed(3, DomainKind::canonical);
  const DirectionSet corner = available_actions(c, state_of({0, 1, 2, 3, 4, 5, 6, 7, 8}));
  CHECK(corner == DirectionSet{Direction::D, Direction::R});
  CHECK(available_actions(empty_domain(3), goal_state(3)).empty());
}

TEST_CASE("apply action") {
  const PuzzleDomain c = make_fixed(2, DomainKind::canonical);
  const PuzzleState g = goal_state(2);
  const Transition t = apply_action(c, g, Direction::U);
  CHECK(t.state.tile_vector() == std::vector<int>{1, 0, 3, 2});
  CHECK(t.cost == 1.0);
  CHECK(g == goal_state(2));
  CHECK_FALSE(is_goal(t.state));
  CHECK(apply_action(c, t.state, Direction::D).state == g);
  CHECK_THROWS_AS(apply_action(c, t.state, Direction::U), IllegalAction);
  CHECK_THROWS_AS(apply_action(c, g, Direction::DR), IllegalAction);
  CHECK_THROWS_AS(apply_action(make_fixed(3, DomainKind::canonical), g, Direction::U), InvalidState);
  CHECK_FALSE(is_goal(state_of({2, 1, 3, 0})));
}

TEST_CASE("move then reverse is identity on random domains") {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const PuzzleDomain d = generate_random({3, DomainKind::random, seed, 0.5});
    REQUIRE(d.is_reversible());
    PuzzleState s = goal_state(3);
    for (int step = 0; step < 200; ++step) {
      const auto acts = available_actions(d, s).to_vector();
      if (acts.empty()) break;
      const Direction a = acts[rng() % acts.size()];
      const Transition t = apply_action(d, s, a);
      auto before = s.tile_vector(), after = t.state.tile_vector();
      std::sort(before.begin(), before.end());
      std::sort(after.begin(), after.end());
      CHECK(before == after);
      CHECK(t.cost == 1.0);
      CHECK(apply_action(d, t.state, reverse(a)).state == s);
      s = t.state;
    }
  }
}

TEST_CASE("random walk") {
  const PuzzleDomain c = make_fixed(3, DomainKind::canonical);
  CHECK(random_walk(c, 0, 5) == goal_state(3));
  CHECK(random_walk(c, 37, 11) == random_walk(c, 37, 11));
  CHECK(random_walk(empty_domain(3), 50, 1) == goal_state(3));

  // Walk states are within `steps` of the goal under the domain's own metric.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PuzzleDomain d = generate_random({3, DomainKind::random, seed, 0.6});
    const OracleTable table = backward_bfs(d);
    for (std::size_t k = 0; k < 40; k += 3) {
      const PuzzleState s = random_walk(d, k, seed * 100 + k);
      const auto cost = table.cost(s);
      REQUIRE(cost.has_value());
      CHECK(*cost <= static_cast<int>(k));
    }
  }
}

TEST_CASE("encoding layout") {
  const PuzzleDomain all = make_fixed(3, DomainKind::all);
  const PuzzleState g = goal_state(3);
  const auto with = encode(all, g, true).values;
  const auto without = encode(all, g, false).values;
  CHECK(with.size() == 153);
  CHECK(without.size() == 81);
  CHECK(std::accumulate(without.begin(), without.end(), 0.0f) == 9.0f);
  CHECK(std::equal(without.begin(), without.end(), with.begin()));
  for (std::size_t i = 81; i < with.size(); ++i) CHECK((with[i] == 0.0f || with[i] == 1.0f));
  // cell 0 stores D, R, DR: indices 1, 3, 7
  CHECK(with[81 + 1] == 1.0f);
  CHECK(with[81 + 3] == 1.0f);
  CHECK(with[81 + 7] == 1.0f);
  CHECK(with[81 + 0] == 0.0f);
  // goal: tile 1 at cell 0, blank at cell 8
  CHECK(without[0 * 9 + 1] == 1.0f);
  CHECK(without[8 * 9 + 0] == 1.0f);
  CHECK(encoded_size(4, true) == 384);
  CHECK(encoded_size(2, false) == 16);
}

TEST_CASE("encoding is injective") {
  const PuzzleDomain c = make_fixed(3, DomainKind::canonical);
  std::set<std::vector<float>> seen;
  std::set<std::vector<int>> states;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    const PuzzleState s = random_walk(c, 30, seed);
    if (states.insert(s.tile_vector()).second) CHECK(seen.insert(encode(c, s, false).values).second);
  }
  const PuzzleState g = goal_state(3);
  CHECK(encode(make_fixed(3, DomainKind::canonical), g, true).values !=
        encode(make_fixed(3, DomainKind::diagonal), g, true).values);
}

TEST_CASE("state keys separate distinct states") {
  std::set<std::pair<std::uint64_t, std::uint64_t>> keys;
  const PuzzleDomain all = make_fixed(5, DomainKind::all);
  std::set<std::vector<int>> distinct;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const PuzzleState s = random_walk(all, 60, seed);
    if (distinct.insert(s.tile_vector()).second) {
      const StateKey k = pack(s);
      CHECK(keys.insert({k.lo, k.hi}).second);
    }
  }
}

TEST_CASE("domain json round trip") {
  const PuzzleDomain c = make_fixed(3, DomainKind::canonical);
  const std::string text = domain_to_json(c);
  CHECK(text.rfind(R"({"n": 3, "cells": [["D","R"],)", 0) == 0);
  CHECK(domain_from_json(text) == c);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const PuzzleDomain d = generate_random({4, DomainKind::random, seed, 0.5});
    CHECK(domain_from_json(domain_to_json(d)) == d);
  }
  CHECK(domain_from_json(R"({ "cells": [["R","D"],["L","D"],["U","R"],["U","L"]], "n": 2 })") ==
        make_fixed(2, DomainKind::canonical));
  CHECK_THROWS_AS(domain_from_json("{"), InvalidDomain);
  CHECK_THROWS_AS(domain_from_json(R"({"n": 2, "cells": [["Q"],[],[],[]]})"), InvalidDomain);
  CHECK_THROWS_AS(domain_from_json(R"({"n": 2, "cells": [["U"],[],[],[]]})"), InvalidDomain);
}
