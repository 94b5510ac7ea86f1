#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <memory>

#include <omp.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>

#include "json_config.hpp"
#include "nphf/davi.hpp"
#include "nphf/dataset.hpp"
#include "nphf/domain_gen.hpp"
#include "nphf/domain_io.hpp"
#include "nphf/errors.hpp"
#include "nphf/eval.hpp"
#include "nphf/manifest.hpp"
#include "nphf/model.hpp"
#include "nphf/oracle.hpp"
#include "nphf/search.hpp"

namespace fs = std::filesystem;
using namespace nphf;

namespace {

constexpr int kExitUsage = 64;

struct Globals {
  std::size_t workers = 1;
  std::uint64_t seed = 0;
  bool no_timing = false;
  std::string log_level = "info";
};

/// Oracle lookups across several domains, one backward BFS table each.
class OracleSet final : public HeuristicProvider {
 public:
  void add(const PuzzleDomain* domain) {
    if (!tables_.count(domain)) tables_.emplace(domain, backward_bfs(*domain));
  }
  void evaluate(const PuzzleDomain& domain, std::span<const PuzzleState> states,
                std::span<double> out) const override {
    OracleHeuristic(tables_.at(&domain)).evaluate(domain, states, out);
  }
  std::string name() const override { return "oracle"; }

 private:
  std::map<const PuzzleDomain*, OracleTable> tables_;
};

std::unique_ptr<HeuristicProvider> make_heuristic(const std::string& kind, const HeuristicModel* model,
                                                  std::span<const SuiteInstance> suite) {
  if (kind == "model") {
    if (!model) throw DomainError("--heuristic model needs --model");
    return std::make_unique<ModelHeuristic>(*model);
  }
  if (kind == "oracle") {
    auto set = std::make_unique<OracleSet>();
    for (const auto& inst : suite) set->add(inst.domain);
    return set;
  }
  if (kind == "relax") return std::make_unique<RelaxHeuristic>();
  if (kind == "zero") return std::make_unique<ZeroHeuristic>();
  throw DomainError("unknown heuristic: " + kind);
}

std::vector<SuiteInstance> suite_from(const Dataset& data, const PuzzleDomain* override_domain) {
  std::vector<SuiteInstance> suite;
  suite.reserve(data.records.size());
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const auto& rec = data.records[i];
    const PuzzleDomain* d = override_domain ? override_domain : &data.domains[rec.domain_index].domain;
    suite.push_back({std::to_string(i), d, rec.state, override_domain ? std::nullopt : rec.opt_cost});
  }
  return suite;
}

class Run {
 public:
  Run(std::string command, int argc, char** argv, const Globals& g)
      : start_(std::chrono::steady_clock::now()) {
    manifest_.command = std::move(command);
    for (int i = 0; i < argc; ++i) manifest_.argv.emplace_back(argv[i]);
    manifest_.workers = static_cast<int>(g.workers);
    manifest_.seeds.emplace_back("seed", g.seed);
  }
  RunManifest& manifest() { return manifest_; }
  void finish(const fs::path& primary_output) {
    manifest_.wall_secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    write_manifest(manifest_, manifest_path_for(primary_output));
  }

 private:
  RunManifest manifest_;
  std::chrono::steady_clock::time_point start_;
};

nlohmann::ordered_json resolved(const CLI::App* sub) {
  return cli::JsonConfig().to_json(sub, true);
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("nphf"));

  CLI::App app{"Sliding-tile puzzles with varying action spaces: generation, exact oracles, "
               "value-iteration training and batched weighted A*"};
  app.require_subcommand(1);
  app.config_formatter(std::make_shared<cli::JsonConfig>());
  app.set_config("--config", "", "JSON config file; command-line flags take precedence");

  Globals g;
  if (const char* env = std::getenv("NPHF_WORKERS")) {
    try {
      g.workers = std::stoul(env);
    } catch (const std::exception&) {
      std::cerr << "ignoring invalid NPHF_WORKERS=" << env << "\n";
    }
  }
  app.add_option("--workers", g.workers, "Worker threads (default $NPHF_WORKERS or 1)")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "Root seed for every random choice");
  app.add_flag("--no-timing", g.no_timing, "Leave wall-clock columns empty so outputs are reproducible");
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error"}));

  // gen-domain
  auto* gen_domain = app.add_subcommand("gen-domain", "Generate one domain");
  int gd_n = 3;
  std::string gd_kind = "random";
  double gd_prob = 0.5;
  fs::path gd_out;
  gen_domain->add_option("--n", gd_n, "Grid dimension")->capture_default_str();
  gen_domain->add_option("--kind", gd_kind, "canonical|diagonal|all|random (or C, D, C+D)")
      ->capture_default_str();
  gen_domain->add_option("--prob", gd_prob, "Slot inclusion probability")->capture_default_str();
  gen_domain->add_option("--out", gd_out, "Output domain JSON")->required();

  // gen-domains
  auto* gen_domains = app.add_subcommand("gen-domains", "Generate a batch of random domains");
  std::size_t gds_count = 1;
  std::uint64_t gds_seed_base = 0;
  fs::path gds_dir;
  gen_domains->add_option("--n", gd_n, "Grid dimension")->capture_default_str();
  gen_domains->add_option("--count", gds_count, "Number of domains")->required();
  gen_domains->add_option("--seed-base", gds_seed_base, "Seed of the first domain")->capture_default_str();
  gen_domains->add_option("--prob", gd_prob, "Slot inclusion probability")->capture_default_str();
  gen_domains->add_option("--out-dir", gds_dir, "Directory for domain_<seed>.json")->required();

  // oracle
  auto* oracle = app.add_subcommand("oracle", "Exact cost-to-go table by backward BFS");
  fs::path or_domain, or_out;
  std::size_t or_cap = kDefaultStateCap;
  oracle->add_option("--domain", or_domain, "Domain JSON")->required()->check(CLI::ExistingFile);
  oracle->add_option("--out", or_out, "Output oracle dump")->required();
  oracle->add_option("--cap", or_cap, "Maximum number of states")->capture_default_str();

  // gen-data
  auto* gen_data = app.add_subcommand("gen-data", "Build a JSONL evaluation dataset");
  std::string dg_protocol = "data2";
  std::optional<std::size_t> dg_states, dg_domains, dg_walk_min, dg_walk_max;
  std::vector<std::string> dg_kinds;
  std::size_t dg_budget = 2'000'000;
  fs::path dg_out;
  gen_data->add_option("--protocol", dg_protocol, "data1|data2|data3")
      ->check(CLI::IsMember({"data1", "data2", "data3"}))
      ->capture_default_str();
  gen_data->add_option("--n", gd_n, "Grid dimension")->capture_default_str();
  gen_data->add_option("--states-per-domain", dg_states, "Override the protocol default");
  gen_data->add_option("--domains", dg_domains, "Number of random domains");
  gen_data->add_option("--kinds", dg_kinds, "Fixed domains to include (C, D, C+D)")->delimiter(',');
  gen_data->add_option("--walk-min", dg_walk_min, "Shortest random walk");
  gen_data->add_option("--walk-max", dg_walk_max, "Longest random walk");
  gen_data->add_option("--prob", gd_prob, "Slot inclusion probability for random domains")
      ->capture_default_str();
  gen_data->add_option("--exact-budget", dg_budget, "A* expansions per state without a full table")
      ->capture_default_str();
  gen_data->add_option("--out", dg_out, "Output JSONL (domain files go alongside)")->required();

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a heuristic network by value iteration");
  TrainConfig tc;
  std::string tc_mode = "conditioned", tc_kind = "canonical";
  fs::path tc_out, tc_log;
  train_cmd->add_option("--mode", tc_mode, "conditioned|ablation|fixed")
      ->check(CLI::IsMember({"conditioned", "ablation", "fixed"}))
      ->capture_default_str();
  train_cmd->add_option("--n", tc.puzzle_n, "Grid dimension")->capture_default_str();
  train_cmd->add_option("--kind", tc_kind, "Domain for fixed mode")->capture_default_str();
  train_cmd->add_option("--prob", tc.inclusion_prob, "Slot inclusion probability")->capture_default_str();
  train_cmd->add_option("--domain-pool", tc.domain_pool, "0 = fresh domain per state")->capture_default_str();
  train_cmd->add_option("--examples", tc.total_examples, "Total training examples")->capture_default_str();
  train_cmd->add_option("--batch", tc.batch_size, "Examples per optimizer step")->capture_default_str();
  train_cmd->add_option("--max-scramble", tc.max_scramble, "Longest training walk")->capture_default_str();
  train_cmd->add_option("--update-threshold", tc.target_update_loss_threshold,
                        "Mean loss that triggers a target refresh")
      ->capture_default_str();
  train_cmd->add_option("--update-window", tc.target_update_window, "Steps in the loss mean")
      ->capture_default_str();
  train_cmd->add_option("--update-max-steps", tc.target_update_max_steps,
                        "Refresh at least this often (0 = never forced)")
      ->capture_default_str();
  train_cmd->add_option("--lr", tc.optimizer.learning_rate, "Adam learning rate")->capture_default_str();
  train_cmd->add_option("--hidden", tc.first_hidden, "First hidden width")->capture_default_str();
  train_cmd->add_option("--width", tc.block_width, "Residual block width")->capture_default_str();
  train_cmd->add_option("--blocks", tc.num_blocks, "Residual blocks")->capture_default_str();
  train_cmd->add_option("--checkpoint-every", tc.checkpoint_every, "Steps between log records")
      ->capture_default_str();
  train_cmd->add_option("--checkpoint", tc.checkpoint_path, "Save the model at every log record");
  train_cmd->add_option("--out", tc_out, "Output weight file")->required();
  train_cmd->add_option("--log", tc_log, "Training curve CSV");

  // solve
  auto* solve_cmd = app.add_subcommand("solve", "Batched weighted A* over a set of states");
  fs::path sv_domain, sv_model, sv_states, sv_out;
  std::string sv_heuristic = "model";
  SearchConfig sc;
  solve_cmd->add_option("--domain", sv_domain, "Use this domain for every state")->check(CLI::ExistingFile);
  solve_cmd->add_option("--model", sv_model, "Weight file")->check(CLI::ExistingFile);
  solve_cmd->add_option("--heuristic", sv_heuristic, "model|oracle|relax|zero")
      ->check(CLI::IsMember({"model", "oracle", "relax", "zero"}))
      ->capture_default_str();
  solve_cmd->add_option("--states", sv_states, "JSONL dataset")->required()->check(CLI::ExistingFile);
  solve_cmd->add_option("--lambda", sc.weight, "Path-cost weight")->capture_default_str();
  solve_cmd->add_option("--batch", sc.batch_size, "Nodes expanded per iteration")->capture_default_str();
  solve_cmd->add_option("--time-limit", sc.time_limit_secs, "Seconds per instance")->capture_default_str();
  solve_cmd->add_option("--node-limit", sc.node_limit, "Generated nodes per instance")->capture_default_str();
  solve_cmd->add_option("--out", sv_out, "Results CSV")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Compare model estimates with exact costs");
  fs::path ev_model, ev_data, ev_out, ev_metrics;
  eval_cmd->add_option("--model", ev_model, "Weight file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--data", ev_data, "JSONL dataset")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--out", ev_out, "Scatter CSV")->required();
  eval_cmd->add_option("--metrics", ev_metrics, "Metrics JSON")->required();

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "Solver table plus correlation metrics");
  fs::path bn_model, bn_data, bn_out, bn_metrics, bn_scatter;
  std::vector<std::string> bn_solvers{"model"};
  bench_cmd->add_option("--model", bn_model, "Weight file")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--data", bn_data, "JSONL dataset")->required()->check(CLI::ExistingFile);
  bench_cmd->add_option("--solvers", bn_solvers, "Heuristics to tabulate (model, oracle, relax, zero)")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--lambda", sc.weight, "Path-cost weight")->capture_default_str();
  bench_cmd->add_option("--batch", sc.batch_size, "Nodes expanded per iteration")->capture_default_str();
  bench_cmd->add_option("--time-limit", sc.time_limit_secs, "Seconds per instance")->capture_default_str();
  bench_cmd->add_option("--node-limit", sc.node_limit, "Generated nodes per instance")->capture_default_str();
  bench_cmd->add_option("--out", bn_out, "Table CSV")->required();
  bench_cmd->add_option("--metrics", bn_metrics, "Metrics JSON")->required();
  bench_cmd->add_option("--scatter", bn_scatter, "Scatter CSV")->required();

  // gradcheck
  auto* grad_cmd = app.add_subcommand("gradcheck", "Finite-difference check of backpropagation");
  double gc_tol = 1e-4;
  ModelConfig gc_cfg{10, 8, 6, 2};
  grad_cmd->add_option("--input", gc_cfg.input_dim, "Input width")->capture_default_str();
  grad_cmd->add_option("--hidden", gc_cfg.first_hidden, "First hidden width")->capture_default_str();
  grad_cmd->add_option("--width", gc_cfg.block_width, "Residual block width")->capture_default_str();
  grad_cmd->add_option("--blocks", gc_cfg.num_blocks, "Residual blocks")->capture_default_str();
  grad_cmd->add_option("--tol", gc_tol, "Maximum relative error")->capture_default_str();

  // vi
  auto* vi_cmd = app.add_subcommand("vi", "Tabular value iteration, checked against backward BFS");
  fs::path vi_domain, vi_out;
  std::size_t vi_sweeps = 1000;
  vi_cmd->add_option("--domain", vi_domain, "Domain JSON")->required()->check(CLI::ExistingFile);
  vi_cmd->add_option("--max-sweeps", vi_sweeps, "Sweep limit")->capture_default_str();
  vi_cmd->add_option("--cap", or_cap, "Maximum number of states")->capture_default_str();
  vi_cmd->add_option("--out", vi_out, "Write the value table as an oracle dump");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  spdlog::set_level(spdlog::level::from_str(g.log_level));
  omp_set_num_threads(static_cast<int>(g.workers));
  CLI::App* sub = app.get_subcommands().front();
  Run run(sub->get_name(), argc, argv, g);
  run.manifest().config = resolved(&app);

  try {
    if (sub == gen_domain) {
      const PuzzleDomain d = generate_random({gd_n, parse_domain_kind(gd_kind), g.seed, gd_prob});
      save_domain(d, gd_out);
      run.manifest().add_output(gd_out);
      run.finish(gd_out);
    } else if (sub == gen_domains) {
      fs::create_directories(gds_dir);
      for (std::size_t i = 0; i < gds_count; ++i) {
        const std::uint64_t seed = gds_seed_base + i;
        const fs::path p = gds_dir / ("domain_" + std::to_string(seed) + ".json");
        save_domain(generate_random({gd_n, DomainKind::random, seed, gd_prob}), p);
        run.manifest().add_output(p);
        run.manifest().seeds.emplace_back(p.filename().string(), seed);
      }
      run.finish(gds_dir / "domains");
    } else if (sub == oracle) {
      const PuzzleDomain d = load_domain(or_domain);
      const OracleTable t = backward_bfs(d, or_cap);
      save_oracle(t, or_out);
      std::cout << "states " << t.size() << "\n";
      run.manifest().add_input(or_domain);
      run.manifest().add_output(or_out);
      run.finish(or_out);
    } else if (sub == gen_data) {
      DatasetSpec spec = DatasetSpec::defaults(parse_protocol(dg_protocol), gd_n, g.seed);
      if (dg_states) spec.states_per_domain = *dg_states;
      if (dg_domains) spec.random_domains = *dg_domains;
      if (!dg_kinds.empty()) {
        spec.fixed_kinds.clear();
        for (const auto& k : dg_kinds) spec.fixed_kinds.push_back(parse_domain_kind(k));
      }
      if (dg_walk_min) spec.walk_min = *dg_walk_min;
      if (dg_walk_max) spec.walk_max = *dg_walk_max;
      spec.inclusion_prob = gd_prob;
      spec.exact_budget = dg_budget;
      const Dataset ds = build_dataset(spec);
      write_dataset(ds, dg_out);
      std::cout << "records " << ds.records.size() << " domains " << ds.domains.size()
                << " unresolved " << ds.unresolved << "\n";
      run.manifest().add_output(dg_out);
      for (const auto& d : ds.domains) run.manifest().add_output(dg_out.parent_path() / d.file);
      run.finish(dg_out);
    } else if (sub == train_cmd) {
      tc.mode = parse_train_mode(tc_mode);
      tc.fixed_domain = {tc.puzzle_n, parse_domain_kind(tc_kind), g.seed, tc.inclusion_prob};
      tc.seed = g.seed;
      tc.workers = g.workers;
      const TrainResult result = train(tc, [](const CheckpointRecord& r) {
        spdlog::info("step {} examples {} loss {:.4f} target_updates {}", r.step, r.examples, r.loss,
                     r.target_updates);
      });
      save_model(result.model, tc_out);
      run.manifest().add_output(tc_out);
      if (!tc_log.empty()) {
        TrainReport report = result.report;
        if (g.no_timing)
          for (auto& rec : report.curve) rec.wall_secs = 0.0;
        write_file(tc_log, train_log_csv(report));
        run.manifest().add_output(tc_log);
      }
      std::cout << "steps " << result.report.steps << " examples " << result.report.examples_seen
                << " target_updates " << result.report.target_updates << "\n";
      run.finish(tc_out);
    } else if (sub == solve_cmd) {
      const Dataset data = load_dataset(sv_states);
      std::optional<PuzzleDomain> domain;
      if (!sv_domain.empty()) domain = load_domain(sv_domain);
      std::optional<HeuristicModel> model;
      if (!sv_model.empty()) model = load_model(sv_model);
      const auto suite = suite_from(data, domain ? &*domain : nullptr);
      const auto h = make_heuristic(sv_heuristic, model ? &*model : nullptr, suite);
      const SuiteReport report = solve_suite(suite, *h, sc);
      write_file(sv_out, results_csv(report.rows, !g.no_timing));
      const auto& s = report.summary;
      std::cout << "solved " << s.solved_pct << "% len " << s.len << " opt " << s.opt_pct << "%\n";
      run.manifest().add_input(sv_states);
      if (!sv_domain.empty()) run.manifest().add_input(sv_domain);
      if (!sv_model.empty()) run.manifest().add_input(sv_model);
      run.manifest().add_output(sv_out);
      run.finish(sv_out);
    } else if (sub == eval_cmd) {
      const HeuristicModel model = load_model(ev_model);
      const Dataset data = load_dataset(ev_data);
      const EvalResult r = evaluate_model(model, data);
      write_file(ev_out, scatter_csv(r.pairs));
      write_file(ev_metrics, metrics_json(r));
      std::cout << "ccc " << r.ccc << " r_squared " << r.r_squared << "\n";
      run.manifest().add_input(ev_model);
      run.manifest().add_input(ev_data);
      run.manifest().add_output(ev_out);
      run.manifest().add_output(ev_metrics);
      run.finish(ev_metrics);
    } else if (sub == bench_cmd) {
      const HeuristicModel model = load_model(bn_model);
      const Dataset data = load_dataset(bn_data);
      if (data.records.empty()) throw InsufficientData("dataset is empty");
      const EvalResult r = evaluate_model(model, data);
      std::vector<BenchmarkSummary> rows;
      for (std::size_t di = 0; di < data.domains.size(); ++di) {
        std::vector<SuiteInstance> suite;
        for (std::size_t i = 0; i < data.records.size(); ++i)
          if (data.records[i].domain_index == di)
            suite.push_back({std::to_string(i), &data.domains[di].domain, data.records[i].state,
                             data.records[i].opt_cost});
        if (suite.empty()) continue;
        for (const auto& solver : bn_solvers) {
          const auto h = make_heuristic(solver, &model, suite);
          SuiteReport rep = solve_suite(suite, *h, sc, data.domains[di].id, solver);
          if (g.no_timing) rep.summary.secs = rep.summary.nodes_per_sec = 0.0;
          rows.push_back(rep.summary);
        }
      }
      write_file(bn_out, benchmark_csv(rows));
      write_file(bn_metrics, metrics_json(r));
      write_file(bn_scatter, scatter_csv(r.pairs));
      std::cout << benchmark_csv(rows);
      run.manifest().add_input(bn_model);
      run.manifest().add_input(bn_data);
      run.manifest().add_output(bn_out);
      run.manifest().add_output(bn_metrics);
      run.manifest().add_output(bn_scatter);
      run.finish(bn_out);
    } else if (sub == grad_cmd) {
      gc_cfg.validate();
      const GradientCheckResult r = gradient_check(gc_cfg, g.seed, gc_tol);
      std::cout << "max_relative_error " << r.max_relative_error << " parameter " << r.worst_parameter
                << (r.passed ? " ok" : " FAIL") << "\n";
      return r.passed ? 0 : 1;
    } else if (sub == vi_cmd) {
      const PuzzleDomain d = load_domain(vi_domain);
      const TabularResult vi = tabular_vi(d, vi_sweeps, or_cap);
      const OracleTable bfs = backward_bfs(d, or_cap);
      bool equal = vi.values.size() == bfs.size();
      if (equal)
        bfs.for_each([&](const PuzzleState& s, int c) { equal = equal && vi.values.cost(s) == c; });
      std::cout << "states " << vi.values.size() << " sweeps " << vi.sweeps << " converged "
                << (vi.converged ? "yes" : "no") << " matches_bfs " << (equal ? "yes" : "no") << "\n";
      if (!vi_out.empty()) {
        save_oracle(vi.values, vi_out);
        run.manifest().add_input(vi_domain);
        run.manifest().add_output(vi_out);
        run.finish(vi_out);
      }
      return vi.converged && equal ? 0 : 1;
    }
  } catch (const CapacityError& e) {
    spdlog::error("{}", e.what());
    return 2;
  } catch (const DomainError& e) {
    spdlog::error("{}", e.what());
    return 1;
  } catch (const std::filesystem::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
