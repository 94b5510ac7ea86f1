#include <doctest.h>

#include "nphf/domain_gen.hpp"
#include "nphf/errors.hpp"

using namespace nphf;

namespace {

bool reversible_slotwise(const PuzzleDomain& d) {
  for (int c = 0; c < d.num_cells(); ++c) {
    bool ok = true;
    d.actions_at(c).for_each([&](Direction dir) {
      const auto t = target_cell(d.n(), c, dir);
      ok = ok && t && d.actions_at(*t).contains(reverse(dir));
    });
    if (!ok) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("fixed domains") {
  const PuzzleDomain c = make_fixed(3, DomainKind::canonical);
  CHECK(c.actions_at(0).size() == 2);
  CHECK(c.actions_at(4).size() == 4);
  CHECK(c.actions_at(1).size() == 3);
  const PuzzleDomain d = make_fixed(3, DomainKind::diagonal);
  CHECK(d.actions_at(0) == DirectionSet{Direction::DR});
  CHECK(d.actions_at(4) == kDiagonal);
  const PuzzleDomain all = make_fixed(3, DomainKind::all);
  CHECK(all.actions_at(4).size() == 8);
  CHECK(all.actions_at(8) == (DirectionSet{Direction::U, Direction::L, Direction::UL}));
  for (auto kind : {DomainKind::canonical, DomainKind::diagonal, DomainKind::all}) {
    for (int n = 2; n <= 5; ++n) {
      const PuzzleDomain f = make_fixed(n, kind);
      CHECK(prune_irreversible(f) == f);
      CHECK(f.is_reversible());
    }
  }
  CHECK_THROWS_AS(make_fixed(1, DomainKind::canonical), InvalidDimension);
  CHECK_THROWS(make_fixed(3, DomainKind::random));
}

TEST_CASE("generate_random edge probabilities") {
  CHECK(generate_random({3, DomainKind::random, 5, 1.0}) == make_fixed(3, DomainKind::all));
  const PuzzleDomain none = generate_random({3, DomainKind::random, 5, 0.0});
  for (int c = 0; c < 9; ++c) CHECK(none.actions_at(c).empty());
  CHECK(generate_random({3, DomainKind::random, 9, 0.5}) == generate_random({3, DomainKind::random, 9, 0.5}));
  CHECK(generate_random({3, DomainKind::canonical, 9, 0.5}) == make_fixed(3, DomainKind::canonical));
  CHECK_THROWS(generate_random({3, DomainKind::random, 9, 1.5}));
}

TEST_CASE("prune removes one-way moves") {
  std::vector<DirectionSet> cells(4);
  cells[2] = DirectionSet{Direction::U, Direction::R};  // cell 2 (bottom-left)
  cells[0] = DirectionSet{Direction::D};                // reverse of U from cell 2
  const PuzzleDomain pruned = prune_irreversible(PuzzleDomain(2, cells));
  CHECK(pruned.actions_at(2) == DirectionSet{Direction::U});
  CHECK(pruned.actions_at(0) == DirectionSet{Direction::D});
  CHECK(pruned.actions_at(3).empty());
}

TEST_CASE("prune against original sets is a fixpoint in one pass") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    for (int n = 2; n <= 5; ++n) {
      // Raw draw without pruning: re-derive by generating with prob 1 and dropping slots.
      std::vector<DirectionSet> raw(n * n);
      std::uint64_t x = seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(n);
      for (int c = 0; c < n * n; ++c) {
        in_grid(n, c).for_each([&](Direction d) {
          x ^= x << 13;
          x ^= x >> 7;
          x ^= x << 17;
          if (x & 1) raw[c].insert(d);
        });
      }
      const PuzzleDomain input(n, raw);
      const PuzzleDomain once = prune_irreversible(input);
      CHECK(reversible_slotwise(once));
      CHECK(prune_irreversible(once) == once);
      for (int c = 0; c < n * n; ++c) CHECK(once.actions_at(c).is_subset_of(input.actions_at(c)));
    }
  }
}

TEST_CASE("free slot accounting") {
  CHECK(count_free_slots(3) == 54);
  CHECK(count_free_slots(4) == 96);
  CHECK(count_free_slots(5) == 150);
}

TEST_CASE("domain kind names") {
  CHECK(parse_domain_kind("C") == DomainKind::canonical);
  CHECK(parse_domain_kind("D") == DomainKind::diagonal);
  CHECK(parse_domain_kind("C+D") == DomainKind::all);
  CHECK(parse_domain_kind("random") == DomainKind::random);
  CHECK_THROWS(parse_domain_kind("hex"));
}
