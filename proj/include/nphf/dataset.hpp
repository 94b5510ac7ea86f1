#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nphf/domain_gen.hpp"
#include "nphf/puzzle.hpp"

namespace nphf {

enum class Protocol { data1, data2, data3 };

std::string_view name(Protocol protocol);
Protocol parse_protocol(std::string_view s);

struct DatasetSpec {
  Protocol protocol = Protocol::data2;
  int n = 3;
  std::vector<DomainKind> fixed_kinds;  // one domain each
  std::size_t random_domains = 0;
  std::size_t states_per_domain = 100;
  std::size_t walk_min = 0;
  std::size_t walk_max = 500;
  std::uint64_t seed = 0;
  double inclusion_prob = 0.5;
  std::size_t oracle_cap = 2'000'000;
  std::size_t exact_budget = 2'000'000;  // A* expansions per state when no full table fits

  /// data1: C, D, C+D × 500 states, walks 1000–10000. data2: 500 random domains × 100
  /// states, walks 0–500. data3: C, D, C+D × 1500 states, walks 0–500.
  static DatasetSpec defaults(Protocol protocol, int n = 3, std::uint64_t seed = 0);
  void validate() const;
};

struct DatasetDomain {
  std::string id;    // C, D, C+D, or r<seed>
  std::string file;  // domain_<id>.json
  PuzzleDomain domain;
};

struct DatasetRecord {
  std::size_t domain_index;
  PuzzleState state;
  std::size_t walk_len;
  std::optional<int> opt_cost;
};

struct Dataset {
  std::vector<DatasetDomain> domains;
  std::vector<DatasetRecord> records;  // grouped by domain, in generation order
  std::size_t unresolved = 0;          // states dropped because no exact cost was found
};

/// Random-walk states per domain with exact costs: full backward BFS when the component
/// fits the cap, else per-state exact A* (n = 4), else no cost (n = 5).
Dataset build_dataset(const DatasetSpec& spec);

/// One JSON object per line: {"domain_file":...,"tiles":[...],"walk_len":k,"opt_cost":v|null}
std::string dataset_jsonl(const Dataset& dataset);

/// Writes the JSONL file and the referenced domain files into the same directory.
void write_dataset(const Dataset& dataset, const std::filesystem::path& jsonl_path);
/// Reads a JSONL dataset; domain files resolve relative to the dataset's directory.
Dataset load_dataset(const std::filesystem::path& jsonl_path);

}  // namespace nphf
