#include "nphf/domain_gen.hpp"

#include <random>
#include <string>

#include "nphf/errors.hpp"

namespace nphf {

std::string_view name(DomainKind kind) {
  switch (kind) {
    case DomainKind::canonical: return "canonical";
    case DomainKind::diagonal: return "diagonal";
    case DomainKind::all: return "all";
    case DomainKind::random: return "random";
  }
  return "random";
}

DomainKind parse_domain_kind(std::string_view s) {
  if (s == "canonical" || s == "C") return DomainKind::canonical;
  if (s == "diagonal" || s == "D") return DomainKind::diagonal;
  if (s == "all" || s == "C+D") return DomainKind::all;
  if (s == "random") return DomainKind::random;
  throw DomainError("unknown domain kind \"" + std::string(s) + "\"");
}

PuzzleDomain make_fixed(int n, DomainKind kind) {
  if (n < 2 || n > kMaxDim) throw InvalidDimension("grid dimension out of range: " + std::to_string(n));
  DirectionSet cls;
  switch (kind) {
    case DomainKind::canonical: cls = kCanonical; break;
    case DomainKind::diagonal: cls = kDiagonal; break;
    case DomainKind::all: cls = kEveryDirection; break;
    case DomainKind::random: throw DomainError("make_fixed needs a fixed domain kind");
  }
  std::vector<DirectionSet> cells;
  for (int c = 0; c < n * n; ++c) cells.push_back(in_grid(n, c, cls));
  return PuzzleDomain(n, std::move(cells));
}

PuzzleDomain generate_random(const DomainSpec& spec) {
  if (spec.kind != DomainKind::random) return make_fixed(spec.n, spec.kind);
  if (!(spec.inclusion_prob >= 0.0 && spec.inclusion_prob <= 1.0))
    throw DomainError("inclusion probability must lie in [0, 1]");
  if (spec.n < 2 || spec.n > kMaxDim)
    throw InvalidDimension("grid dimension out of range: " + std::to_string(spec.n));
  std::mt19937_64 rng(spec.seed);
  std::bernoulli_distribution keep(spec.inclusion_prob);
  std::vector<DirectionSet> cells;
  for (int c = 0; c < spec.n * spec.n; ++c) {
    DirectionSet set;
    in_grid(spec.n, c).for_each([&](Direction d) {
      if (keep(rng)) set.insert(d);
    });
    cells.push_back(set);
  }
  return prune_irreversible(PuzzleDomain(spec.n, std::move(cells)));
}

PuzzleDomain prune_irreversible(const PuzzleDomain& domain) {
  const int n = domain.n();
  std::vector<DirectionSet> out(domain.cells().begin(), domain.cells().end());
  for (int c = 0; c < domain.num_cells(); ++c) {
    domain.actions_at(c).for_each([&](Direction d) {
      if (!domain.actions_at(*target_cell(n, c, d)).contains(reverse(d)))
        out[static_cast<std::size_t>(c)].erase(d);
    });
  }
  return PuzzleDomain(n, std::move(out));
}

int count_free_slots(int n) {
  if (n < 2) throw InvalidDimension("grid dimension must be at least 2");
  return 8 * n * n - 2 * n * n;
}

}  // namespace nphf
