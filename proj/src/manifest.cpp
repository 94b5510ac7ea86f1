#include "nphf/manifest.hpp"

#include <array>
#include <cstdio>

#include <openssl/evp.h>

#include "nphf/domain_io.hpp"
#include "nphf/errors.hpp"

namespace nphf {

namespace {

std::string to_hex(const unsigned char* data, unsigned len) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned i = 0; i < len; ++i) {
    out += kHex[data[i] >> 4];
    out += kHex[data[i] & 15];
  }
  return out;
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    throw DomainError("sha256 failed");
  return to_hex(md.data(), len);
}

std::string sha256_file(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

void RunManifest::add_input(const std::filesystem::path& path) {
  inputs.push_back({path.string(), sha256_file(path)});
}

void RunManifest::add_output(const std::filesystem::path& path) {
  outputs.push_back({path.string(), sha256_file(path)});
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["version"] = kVersion;
  j["command"] = command;
  j["argv"] = argv;
  j["config"] = config;
  auto& s = j["seeds"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : seeds) s[k] = v;
  auto files = [](const std::vector<FileDigest>& list) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : list) arr.push_back({{"path", f.path}, {"sha256", f.sha256}});
    return arr;
  };
  j["inputs"] = files(inputs);
  j["outputs"] = files(outputs);
  j["workers"] = workers;
  j["wall_secs"] = wall_secs;
  return j.dump(2) + "\n";
}

std::filesystem::path manifest_path_for(const std::filesystem::path& output) {
  auto p = output;
  p += ".manifest.json";
  return p;
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  write_file(path, manifest.to_json());
}

}  // namespace nphf
