#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <json.hpp>
#include <string>

#include "nphf/domain_io.hpp"
#include "nphf/oracle.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "nphf_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (work_dir() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = std::string(NPHF_CLI_PATH) + " " + args + " >" + at("stdout.txt") + " 2>" + at("stderr.txt");
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("cli exit codes") {
  CHECK(run("--help") == 0);
  CHECK(run("no-such-command") == 64);
  CHECK(run("gen-domain --n 3") == 64);
  CHECK(run("gen-domain --n 9 --kind C --out " + at("bad.json")) == 1);
  CHECK(run("gen-domain --n 3 --kind C --out " + at("c.json")) == 0);
  CHECK(run("oracle --domain " + at("c.json") + " --cap 1000 --out " + at("c.bin")) == 2);
}

TEST_CASE("cli oracle and value iteration agree") {
  REQUIRE(run("--seed 5 gen-domain --n 3 --kind random --prob 0.6 --out " + at("r.json")) == 0);
  REQUIRE(run("oracle --domain " + at("r.json") + " --out " + at("r.bin")) == 0);
  REQUIRE(run("vi --domain " + at("r.json") + " --out " + at("r_vi.bin")) == 0);
  CHECK(nphf::load_oracle(at("r.bin")).entries() == nphf::load_oracle(at("r_vi.bin")).entries());
  CHECK(fs::exists(at("r.bin.manifest.json")));
  const auto manifest = nlohmann::json::parse(nphf::read_file(at("r.bin.manifest.json")));
  CHECK(manifest.at("command") == "oracle");
  CHECK(manifest.at("inputs").size() == 1);
  CHECK(run("gradcheck") == 0);
  CHECK(run("gradcheck --tol 0") == 1);
}

TEST_CASE("cli pipeline is reproducible without timing") {
  const std::string common = "--workers 1 --no-timing --seed 3 ";
  REQUIRE(run(common + "gen-data --protocol data2 --domains 3 --states-per-domain 8 --out " + at("d/data.jsonl")) == 0);
  for (const char* tag : {"a", "b"}) {
    const std::string t(tag);
    REQUIRE(run(common + "train --mode conditioned --examples 2000 --batch 100 --hidden 32 --width 16 --blocks 1 --out " +
                at("m_" + t + ".nphf") + " --log " + at("log_" + t + ".csv")) == 0);
    REQUIRE(run(common + "solve --model " + at("m_" + t + ".nphf") + " --states " + at("d/data.jsonl") +
                " --batch 50 --out " + at("res_" + t + ".csv")) == 0);
    REQUIRE(run(common + "eval --model " + at("m_" + t + ".nphf") + " --data " + at("d/data.jsonl") + " --out " +
                at("sc_" + t + ".csv") + " --metrics " + at("met_" + t + ".json")) == 0);
  }
  for (const char* stem : {"m_", "log_", "res_", "sc_", "met_"}) {
    const std::string s(stem);
    const char* ext = s == "m_" ? ".nphf" : (s == "met_" ? ".json" : ".csv");
    CHECK(nphf::read_file(at(s + "a" + ext)) == nphf::read_file(at(s + "b" + ext)));
  }
  CHECK(fs::exists(at("d/domain_r0000.json")));
  const std::string results = nphf::read_file(at("res_a.csv"));
  CHECK(results.rfind("instance_id,solved,cost,optimal_cost,nodes,secs\n", 0) == 0);
  REQUIRE(run(common + "bench --model " + at("m_a.nphf") + " --data " + at("d/data.jsonl") +
              " --solvers model,oracle --batch 50 --out " + at("bench.csv") + " --metrics " + at("bm.json") +
              " --scatter " + at("bs.csv")) == 0);
  CHECK(nphf::read_file(at("bench.csv")).find("r0000,oracle,") != std::string::npos);
}
