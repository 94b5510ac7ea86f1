#include <bit>
#include <cstring>
#include <json.hpp>

#include "nphf/domain_io.hpp"
#include "nphf/errors.hpp"
#include "nphf/model.hpp"

namespace nphf {

namespace {

constexpr char kMagic[6] = {'N', 'P', 'H', 'F', '1', '\0'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t get_u32(std::string_view in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + i])) << (8 * i);
  return v;
}

// Visits parameters in file order: per layer, weights by output neuron then input, then biases.
template <class F>
void for_each_file_param(const LayerShape& l, F&& f) {
  for (std::size_t o = 0; o < l.out; ++o)
    for (std::size_t i = 0; i < l.in; ++i) f(l.weight_offset + i * l.out + o);
  for (std::size_t o = 0; o < l.out; ++o) f(l.bias_offset + o);
}

}  // namespace

void save_model(const HeuristicModel& model, const std::filesystem::path& path) {
  const ModelConfig& c = model.config();
  nlohmann::ordered_json header = {
      {"format", "nphf"},
      {"input_dim", c.input_dim},
      {"first_hidden", c.first_hidden},
      {"block_width", c.block_width},
      {"num_blocks", c.num_blocks},
      {"n", model.layout().n},
      {"with_actions", model.layout().with_actions},
      {"parameter_count", model.parameter_count()},
      {"dtype", "float32-le"}};
  const std::string json = header.dump();
  std::string out(kMagic, sizeof(kMagic));
  out.push_back(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(json.size()));
  out += json;
  const auto params = model.parameters();
  out.reserve(out.size() + params.size() * 4);
  for (const LayerShape& l : model.layers()) {
    for_each_file_param(l, [&](std::size_t idx) { put_u32(out, std::bit_cast<std::uint32_t>(params[idx])); });
  }
  write_file(path, out);
}

HeuristicModel load_model(const std::filesystem::path& path) {
  const std::string bytes = read_file(path);
  constexpr std::size_t kPrefix = sizeof(kMagic) + 1 + 4;
  if (bytes.size() < kPrefix || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw CorruptModel("bad magic in " + path.string());
  if (static_cast<std::uint8_t>(bytes[sizeof(kMagic)]) != kVersion)
    throw CorruptModel("unsupported weight file version in " + path.string());
  const std::uint32_t len = get_u32(bytes, sizeof(kMagic) + 1);
  if (bytes.size() < kPrefix + len) throw CorruptModel("truncated header in " + path.string());
  nlohmann::json header;
  ModelConfig config;
  InputLayout layout;
  std::size_t count = 0;
  try {
    header = nlohmann::json::parse(bytes.substr(kPrefix, len));
    config.input_dim = header.at("input_dim").get<std::size_t>();
    config.first_hidden = header.at("first_hidden").get<std::size_t>();
    config.block_width = header.at("block_width").get<std::size_t>();
    config.num_blocks = header.at("num_blocks").get<std::size_t>();
    layout.n = header.at("n").get<int>();
    layout.with_actions = header.at("with_actions").get<bool>();
    count = header.at("parameter_count").get<std::size_t>();
    config.validate();
  } catch (const std::exception& e) {
    throw CorruptModel("bad header in " + path.string() + ": " + e.what());
  }
  if (count != config.parameter_count())
    throw CorruptModel("parameter count in header does not match its dimensions");
  if (bytes.size() != kPrefix + len + 4 * count)
    throw CorruptModel("payload size mismatch in " + path.string() + " (truncated?)");
  HeuristicModel model(config, layout);
  auto params = model.parameters();
  std::size_t pos = kPrefix + len;
  for (const LayerShape& l : model.layers()) {
    for_each_file_param(l, [&](std::size_t idx) {
      params[idx] = std::bit_cast<float>(get_u32(bytes, pos));
      pos += 4;
    });
  }
  return model;
}

void require_input_dim(const HeuristicModel& model, std::size_t expected_input_dim) {
  if (model.config().input_dim != expected_input_dim)
    throw CorruptModel("model expects " + std::to_string(model.config().input_dim) +
                       " inputs but the domain encodes " + std::to_string(expected_input_dim));
}

}  // namespace nphf
