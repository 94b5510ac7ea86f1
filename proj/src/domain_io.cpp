#include "nphf/domain_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "nphf/errors.hpp"

namespace nphf {

std::string domain_to_json(const PuzzleDomain& domain) {
  std::string out = "{\"n\": " + std::to_string(domain.n()) + ", \"cells\": [";
  for (int c = 0; c < domain.num_cells(); ++c) {
    if (c) out += ", ";
    out += '[';
    bool first = true;
    domain.actions_at(c).for_each([&](Direction d) {
      if (!first) out += ',';
      first = false;
      out += '"';
      out += name(d);
      out += '"';
    });
    out += ']';
  }
  out += "]}";
  return out;
}

PuzzleDomain domain_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidDomain(std::string("domain JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("n") || !doc.contains("cells") ||
      !doc["n"].is_number_integer() || !doc["cells"].is_array())
    throw InvalidDomain("domain JSON needs integer \"n\" and array \"cells\"");
  const int n = doc["n"].get<int>();
  std::vector<DirectionSet> cells;
  for (const auto& cell : doc["cells"]) {
    if (!cell.is_array()) throw InvalidDomain("each cell must be an array of direction names");
    DirectionSet set;
    for (const auto& item : cell) {
      if (!item.is_string()) throw InvalidDomain("direction names must be strings");
      const auto d = parse_direction(item.get<std::string>());
      if (!d) throw InvalidDomain("unknown direction \"" + item.get<std::string>() + "\"");
      set.insert(*d);
    }
    cells.push_back(set);
  }
  return PuzzleDomain(n, std::move(cells));
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DomainError("cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw DomainError("short write to " + path.string());
}

void save_domain(const PuzzleDomain& domain, const std::filesystem::path& path) {
  write_file(path, domain_to_json(domain) + "\n");
}

PuzzleDomain load_domain(const std::filesystem::path& path) { return domain_from_json(read_file(path)); }

}  // namespace nphf
