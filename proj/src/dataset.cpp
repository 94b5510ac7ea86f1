#include "nphf/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "nphf/domain_io.hpp"
#include "nphf/errors.hpp"
#include "nphf/oracle.hpp"
#include "nphf/seeding.hpp"

namespace nphf {

namespace {

constexpr std::uint64_t kDomainStream = 0x646f6d61696e73ULL;
constexpr std::uint64_t kWalkStream = 0x77616c6b73ULL;

std::string fixed_id(DomainKind kind) {
  switch (kind) {
    case DomainKind::canonical: return "C";
    case DomainKind::diagonal: return "D";
    case DomainKind::all: return "C+D";
    case DomainKind::random: break;
  }
  throw InvalidDomain("random is not a fixed domain kind");
}

std::string file_for(const std::string& id) {
  return "domain_" + id + ".json";
}

std::string random_id(std::size_t i) {
  std::ostringstream os;
  os << 'r' << std::setw(4) << std::setfill('0') << i;
  return os.str();
}

struct DomainRecords {
  std::vector<DatasetRecord> records;
  std::size_t unresolved = 0;
};

DomainRecords build_for_domain(const DatasetSpec& spec, const PuzzleDomain& domain,
                               std::size_t domain_index) {
  DomainRecords out;
  std::mt19937_64 rng(derive_seed(derive_seed(spec.seed, kWalkStream), domain_index));
  std::uniform_int_distribution<std::size_t> walk_len(spec.walk_min, spec.walk_max);
  std::vector<std::pair<PuzzleState, std::size_t>> states;
  states.reserve(spec.states_per_domain);
  for (std::size_t i = 0; i < spec.states_per_domain; ++i) {
    const std::size_t k = walk_len(rng);
    PuzzleState s = goal_state(domain.n());
    random_walk_from(domain, s, k, rng);
    states.emplace_back(s, k);
  }

  std::optional<OracleTable> table;
  if (spec.n <= 4) {
    try {
      table = backward_bfs(domain, spec.oracle_cap);
    } catch (const CapacityError&) {
      spdlog::debug("dataset: domain {} exceeds the table cap, using per-state search",
                    domain_index);
    }
  }

  for (auto& [s, k] : states) {
    std::optional<int> cost;
    if (table) {
      cost = table->cost(s);
    } else if (spec.n <= 4) {
      const ExactCost ec = exact_cost(domain, s, spec.exact_budget);
      if (ec.status != ExactCost::Status::solved) {
        ++out.unresolved;
        continue;
      }
      cost = ec.cost;
    }
    out.records.push_back({domain_index, s, k, cost});
  }
  return out;
}

}  // namespace

std::string_view name(Protocol protocol) {
  switch (protocol) {
    case Protocol::data1: return "data1";
    case Protocol::data2: return "data2";
    case Protocol::data3: return "data3";
  }
  return "?";
}

Protocol parse_protocol(std::string_view s) {
  if (s == "data1") return Protocol::data1;
  if (s == "data2") return Protocol::data2;
  if (s == "data3") return Protocol::data3;
  throw DomainError("unknown protocol: " + std::string(s));
}

DatasetSpec DatasetSpec::defaults(Protocol protocol, int n, std::uint64_t seed) {
  DatasetSpec spec;
  spec.protocol = protocol;
  spec.n = n;
  spec.seed = seed;
  switch (protocol) {
    case Protocol::data1:
      spec.fixed_kinds = {DomainKind::canonical, DomainKind::diagonal, DomainKind::all};
      spec.states_per_domain = 500;
      spec.walk_min = 1000;
      spec.walk_max = 10000;
      break;
    case Protocol::data2:
      spec.random_domains = 500;
      spec.states_per_domain = 100;
      spec.walk_min = 0;
      spec.walk_max = 500;
      break;
    case Protocol::data3:
      spec.fixed_kinds = {DomainKind::canonical, DomainKind::diagonal, DomainKind::all};
      spec.states_per_domain = 1500;
      spec.walk_min = 0;
      spec.walk_max = 500;
      break;
  }
  return spec;
}

void DatasetSpec::validate() const {
  if (n < 2 || n > kMaxDim) throw InvalidDimension("dataset n must be in [2, 5]");
  if (walk_min > walk_max) throw DomainError("walk_min exceeds walk_max");
  if (!(inclusion_prob >= 0.0 && inclusion_prob <= 1.0))
    throw DomainError("inclusion probability must be in [0, 1]");
  for (DomainKind k : fixed_kinds)
    if (k == DomainKind::random) throw DomainError("fixed_kinds may not contain random");
}

Dataset build_dataset(const DatasetSpec& spec) {
  spec.validate();
  Dataset ds;
  for (DomainKind k : spec.fixed_kinds)
    ds.domains.push_back({fixed_id(k), file_for(fixed_id(k)), make_fixed(spec.n, k)});
  const std::uint64_t domain_root = derive_seed(spec.seed, kDomainStream);
  for (std::size_t i = 0; i < spec.random_domains; ++i) {
    const DomainSpec ds_spec{spec.n, DomainKind::random, derive_seed(domain_root, i),
                             spec.inclusion_prob};
    ds.domains.push_back({random_id(i), file_for(random_id(i)), generate_random(ds_spec)});
  }

  std::vector<DomainRecords> parts(ds.domains.size());
  const auto count = static_cast<std::ptrdiff_t>(ds.domains.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      const auto idx = static_cast<std::size_t>(i);
      parts[idx] = build_for_domain(spec, ds.domains[idx].domain, idx);
    } catch (...) {
#pragma omp critical(nphf_dataset_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& part : parts) {
    ds.unresolved += part.unresolved;
    for (auto& rec : part.records) ds.records.push_back(std::move(rec));
  }
  if (ds.unresolved > 0)
    spdlog::info("dataset: dropped {} states without an exact cost", ds.unresolved);
  return ds;
}

std::string dataset_jsonl(const Dataset& dataset) {
  std::string out;
  for (const auto& rec : dataset.records) {
    nlohmann::ordered_json j;
    j["domain_file"] = dataset.domains[rec.domain_index].file;
    j["tiles"] = rec.state.tile_vector();
    j["walk_len"] = rec.walk_len;
    j["opt_cost"] = rec.opt_cost ? nlohmann::ordered_json(*rec.opt_cost) : nullptr;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& jsonl_path) {
  const auto dir = jsonl_path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  for (const auto& d : dataset.domains) save_domain(d.domain, dir / d.file);
  write_file(jsonl_path, dataset_jsonl(dataset));
}

Dataset load_dataset(const std::filesystem::path& jsonl_path) {
  std::ifstream in(jsonl_path);
  if (!in) throw DomainError("cannot open dataset " + jsonl_path.string());
  const auto dir = jsonl_path.parent_path();
  Dataset ds;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string file = j.at("domain_file").get<std::string>();
      auto it = index.find(file);
      if (it == index.end()) {
        std::string id = std::filesystem::path(file).stem().string();
        if (id.rfind("domain_", 0) == 0) id = id.substr(7);
        ds.domains.push_back({id, file, load_domain(dir / file)});
        it = index.emplace(file, ds.domains.size() - 1).first;
      }
      const auto tiles = j.at("tiles").get<std::vector<int>>();
      PuzzleState s(ds.domains[it->second].domain.n(), tiles);
      std::optional<int> cost;
      if (!j.at("opt_cost").is_null()) cost = j.at("opt_cost").get<int>();
      ds.records.push_back({it->second, s, j.at("walk_len").get<std::size_t>(), cost});
    } catch (const nlohmann::json::exception& e) {
      throw DomainError(jsonl_path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return ds;
}

}  // namespace nphf
