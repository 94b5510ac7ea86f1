#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

namespace nphf {

inline constexpr std::string_view kVersion = "0.1.0";

std::string sha256_hex(std::string_view bytes);
/// Throws DomainError when the file cannot be read.
std::string sha256_file(const std::filesystem::path& path);

struct FileDigest {
  std::string path;
  std::string sha256;
};

/// Provenance record written next to every run's outputs.
struct RunManifest {
  std::string command;
  std::vector<std::string> argv;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::pair<std::string, std::uint64_t>> seeds;
  std::vector<FileDigest> inputs;
  std::vector<FileDigest> outputs;
  int workers = 1;
  double wall_secs = 0.0;

  void add_input(const std::filesystem::path& path);
  void add_output(const std::filesystem::path& path);
  std::string to_json() const;
};

/// <output>.manifest.json
std::filesystem::path manifest_path_for(const std::filesystem::path& output);
void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);

}  // namespace nphf
