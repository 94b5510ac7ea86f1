#pragma once

#include <cstdint>
#include <string_view>

#include "nphf/puzzle.hpp"

namespace nphf {

enum class DomainKind { canonical, diagonal, all, random };

std::string_view name(DomainKind kind);
/// Accepts canonical|diagonal|all|random and the short labels C, D, C+D.
DomainKind parse_domain_kind(std::string_view s);

struct DomainSpec {
  int n = 3;
  DomainKind kind = DomainKind::random;
  std::uint64_t seed = 0;
  double inclusion_prob = 0.5;
};

/// Every cell gets all in-grid directions of the class. Reversible by construction.
PuzzleDomain make_fixed(int n, DomainKind kind);

/// Each in-grid (cell, direction) slot is kept with probability inclusion_prob, then the
/// irreversible moves are pruned. Fixed kinds dispatch to make_fixed.
PuzzleDomain generate_random(const DomainSpec& spec);

/// Drops every move whose reverse is missing at its target cell. Membership is checked
/// against the input sets, so a single pass already yields a reversible domain.
PuzzleDomain prune_irreversible(const PuzzleDomain& domain);

/// Free slots in the domain family: 8n² total minus 2n² reserved for reversible moves.
int count_free_slots(int n);

}  // namespace nphf
