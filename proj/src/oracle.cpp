#include "nphf/oracle.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <deque>
#include <queue>

#include "nphf/domain_io.hpp"
#include "nphf/errors.hpp"

namespace nphf {

namespace {

constexpr std::array<std::uint64_t, 17> kFactorial = [] {
  std::array<std::uint64_t, 17> f{};
  f[0] = 1;
  for (std::size_t i = 1; i < f.size(); ++i) f[i] = f[i - 1] * i;
  return f;
}();

constexpr char kOracleMagic[8] = {'N', 'P', 'O', 'R', 'A', 'C', 'L', '1'};

template <class T>
void put_le(std::string& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i)
    out.push_back(static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF));
}

template <class T>
T get_le(std::string_view in, std::size_t pos) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return static_cast<T>(v);
}

}  // namespace

std::uint64_t permutation_rank(const PuzzleState& state) {
  const int cells = state.num_cells();
  if (cells > 16) throw InvalidDimension("permutation rank needs n <= 4");
  std::uint64_t rank = 0;
  std::uint32_t used = 0;
  for (int i = 0; i < cells; ++i) {
    const int t = state.tile(i);
    const int smaller_unused = t - __builtin_popcount(used & ((1U << t) - 1U));
    rank += static_cast<std::uint64_t>(smaller_unused) * kFactorial[static_cast<std::size_t>(cells - 1 - i)];
    used |= 1U << t;
  }
  return rank;
}

PuzzleState permutation_unrank(int n, std::uint64_t rank) {
  const int cells = n * n;
  if (n < 2 || cells > 16) throw InvalidDimension("permutation unrank needs 2 <= n <= 4");
  std::vector<int> pool(static_cast<std::size_t>(cells));
  for (int i = 0; i < cells; ++i) pool[static_cast<std::size_t>(i)] = i;
  std::vector<int> tiles;
  tiles.reserve(pool.size());
  for (int i = 0; i < cells; ++i) {
    const std::uint64_t f = kFactorial[static_cast<std::size_t>(cells - 1 - i)];
    const auto pick = static_cast<std::size_t>(rank / f);
    rank %= f;
    tiles.push_back(pool[pick]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return PuzzleState(n, tiles);
}

OracleTable::OracleTable(PuzzleDomain domain) : domain_(std::move(domain)) {
  if (domain_.n() <= 3)
    dense_.assign(static_cast<std::size_t>(kFactorial[static_cast<std::size_t>(domain_.num_cells())]), kUnreached);
}

StateKey OracleTable::key_of(const PuzzleState& s) const {
  if (domain_.n() <= 4) return StateKey{permutation_rank(s), 0};
  return pack(s);
}

std::optional<int> OracleTable::cost(const PuzzleState& state) const {
  if (state.n() != domain_.n()) return std::nullopt;
  if (!dense_.empty()) {
    const std::uint16_t c = dense_[permutation_rank(state)];
    if (c == kUnreached) return std::nullopt;
    return c;
  }
  const auto it = sparse_.find(key_of(state));
  if (it == sparse_.end()) return std::nullopt;
  return it->second;
}

bool OracleTable::insert(const PuzzleState& state, int cost) {
  if (cost < 0 || cost >= kUnreached) throw CapacityError("cost-to-go exceeds 16-bit range");
  const auto c = static_cast<std::uint16_t>(cost);
  if (!dense_.empty()) {
    std::uint16_t& slot = dense_[permutation_rank(state)];
    if (slot != kUnreached) return false;
    slot = c;
  } else if (!sparse_.emplace(key_of(state), c).second) {
    return false;
  }
  ++size_;
  return true;
}

std::vector<std::pair<std::uint64_t, std::uint16_t>> OracleTable::entries() const {
  if (domain_.n() > 4) throw InvalidDimension("rank-keyed entries need n <= 4");
  std::vector<std::pair<std::uint64_t, std::uint16_t>> out;
  out.reserve(size_);
  if (!dense_.empty()) {
    for (std::size_t r = 0; r < dense_.size(); ++r)
      if (dense_[r] != kUnreached) out.emplace_back(r, dense_[r]);
    return out;
  }
  for (const auto& [key, c] : sparse_) out.emplace_back(key.lo, c);
  std::sort(out.begin(), out.end());
  return out;
}

OracleTable backward_bfs(const PuzzleDomain& domain, std::size_t cap) {
  if (!domain.is_reversible())
    throw InvalidDomain("backward BFS needs a reversibility-validated domain");
  OracleTable table(domain);
  std::deque<std::pair<PuzzleState, int>> frontier;
  const PuzzleState goal = goal_state(domain.n());
  table.insert(goal, 0);
  frontier.emplace_back(goal, 0);
  while (!frontier.empty()) {
    const auto [state, dist] = frontier.front();
    frontier.pop_front();
    bool over = false;
    domain.actions_at(state.blank()).for_each([&](Direction d) {
      PuzzleState next = successor(state, d);
      if (table.insert(next, dist + 1)) {
        if (table.size() > cap) over = true;
        frontier.emplace_back(next, dist + 1);
      }
    });
    if (over)
      throw CapacityError("goal component exceeds the state cap of " + std::to_string(cap));
  }
  return table;
}

RelaxedCellGraph::RelaxedCellGraph(const PuzzleDomain& domain)
    : cells_(domain.num_cells()), dist_(static_cast<std::size_t>(cells_ * cells_), -1) {
  const DirectionSet moves = domain.union_of_actions();
  for (int src = 0; src < cells_; ++src) {
    int* row = &dist_[static_cast<std::size_t>(src * cells_)];
    std::vector<int> queue{src};
    row[src] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      const int c = queue[head];
      moves.for_each([&](Direction d) {
        const auto t = target_cell(domain.n(), c, d);
        if (t && row[*t] < 0) {
          row[*t] = row[c] + 1;
          queue.push_back(*t);
        }
      });
    }
  }
}

std::optional<int> RelaxedCellGraph::lower_bound(const PuzzleState& state) const {
  int best = 0;
  for (int c = 0; c < cells_; ++c) {
    const int t = state.tile(c);
    if (t == 0) continue;
    const int d = dist_[static_cast<std::size_t>(c * cells_ + (t - 1))];
    if (d < 0) return std::nullopt;
    best = std::max(best, d);
  }
  return best;
}

std::optional<int> relax_heuristic(const PuzzleDomain& domain, const PuzzleState& state) {
  return RelaxedCellGraph(domain).lower_bound(state);
}

ExactCost exact_cost(const PuzzleDomain& domain, const PuzzleState& state, std::size_t node_budget) {
  if (!domain.is_reversible()) throw InvalidDomain("exact_cost needs a reversibility-validated domain");
  if (state.n() != domain.n()) throw InvalidState("state and domain dimensions differ");
  using Status = ExactCost::Status;
  const RelaxedCellGraph relaxed(domain);
  const auto h0 = relaxed.lower_bound(state);
  if (!h0) return {Status::unreachable, 0, 0};

  struct Entry {
    int f;
    int g;
    std::uint64_t seq;
    PuzzleState state;
  };
  auto worse = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g != b.g) return a.g < b.g;
    return a.seq > b.seq;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> open(worse);
  std::unordered_map<StateKey, int, StateKeyHash> best_g;
  std::uint64_t seq = 0;
  open.push({*h0, 0, seq++, state});
  best_g.emplace(pack(state), 0);
  std::size_t expanded = 0;
  while (!open.empty()) {
    Entry top = open.top();
    open.pop();
    if (best_g[pack(top.state)] < top.g) continue;
    if (is_goal(top.state)) return {Status::solved, top.g, expanded};
    if (++expanded > node_budget) return {Status::budget_exceeded, 0, expanded};
    domain.actions_at(top.state.blank()).for_each([&](Direction d) {
      PuzzleState next = successor(top.state, d);
      const int g = top.g + 1;
      auto [it, fresh] = best_g.emplace(pack(next), g);
      if (!fresh) {
        if (it->second <= g) return;
        it->second = g;
      }
      const auto h = relaxed.lower_bound(next);
      if (h) open.push({g + *h, g, seq++, next});
    });
  }
  return {Status::unreachable, 0, expanded};
}

void save_oracle(const OracleTable& table, const std::filesystem::path& path) {
  const std::string json = domain_to_json(table.domain());
  std::string out(kOracleMagic, sizeof(kOracleMagic));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(json.size()));
  out += json;
  for (const auto& [rank, c] : table.entries()) {
    put_le<std::uint64_t>(out, rank);
    put_le<std::uint16_t>(out, c);
  }
  write_file(path, out);
}

OracleTable load_oracle(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  if (bytes.size() < 12 || std::memcmp(bytes.data(), kOracleMagic, sizeof(kOracleMagic)) != 0)
    throw DomainError("not an oracle dump: " + path.string());
  const auto len = get_le<std::uint32_t>(bytes, 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(len) || (bytes.size() - 12 - len) % 10 != 0)
    throw DomainError("truncated oracle dump: " + path.string());
  OracleTable table(domain_from_json(std::string_view(bytes).substr(12, len)));
  std::uint64_t prev = 0;
  for (std::size_t pos = 12 + len; pos < bytes.size(); pos += 10) {
    const auto rank = get_le<std::uint64_t>(bytes, pos);
    const auto c = get_le<std::uint16_t>(bytes, pos + 8);
    if (pos > 12 + len && rank <= prev) throw DomainError("oracle dump is not sorted by rank");
    prev = rank;
    table.insert(permutation_unrank(table.domain().n(), rank), c);
  }
  return table;
}

}  // namespace nphf
