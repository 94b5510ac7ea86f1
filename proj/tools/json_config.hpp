#pragma once

// CLI11 config formatter reading and writing JSON. Top-level keys are options of the main
// app; nested objects address subcommands, e.g. {"workers": 1, "train": {"examples": 3000000}}.

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

namespace nphf::cli {

class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return to_json(app, default_also).dump(2);
  }

  nlohmann::ordered_json to_json(const CLI::App* app, bool default_also) const {
    nlohmann::ordered_json j = nlohmann::ordered_json::object();
    for (const CLI::Option* opt : app->get_options({})) {
      if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
      const std::string key = opt->get_lnames()[0];
      if (opt->get_type_size() != 0) {
        if (opt->count() == 1)
          j[key] = opt->results().at(0);
        else if (opt->count() > 1)
          j[key] = opt->results();
        else if (default_also && !opt->get_default_str().empty())
          j[key] = opt->get_default_str();
      } else if (opt->count() > 0) {
        j[key] = true;
      } else if (default_also) {
        j[key] = false;
      }
    }
    for (const CLI::App* sub : app->get_subcommands({}))
      if (sub->parsed()) j[sub->get_name()] = to_json(sub, default_also);
    return j;
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      input >> j;
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static void collect(const nlohmann::json& obj, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& items) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (it->is_object()) {
        auto sub = parents;
        sub.push_back(it.key());
        collect(*it, sub, items);
        continue;
      }
      CLI::ConfigItem& item = items.emplace_back();
      item.name = it.key();
      item.parents = parents;
      if (it->is_array()) {
        for (const auto& v : *it) item.inputs.push_back(scalar(v, it.key()));
      } else {
        item.inputs = {scalar(*it, it.key())};
      }
    }
  }

  static std::string scalar(const nlohmann::json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number()) return v.dump();
    throw CLI::ConversionError("unsupported config value for " + key);
  }
};

}  // namespace nphf::cli
