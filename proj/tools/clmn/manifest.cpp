// SPDX-License-Identifier: Apache-2.0
#include "manifest.hpp"

#include "clmn/io_util.hpp"

#include <filesystem>
#include <iterator>

#ifndef CLMN_VERSION
#define CLMN_VERSION "0.0.0"
#endif

namespace clmn::cli {

namespace {

bool skipped(const std::string& name) { return name == "help" || name == "config"; }

}  // namespace

nlohmann::ordered_json collect_config(const CLI::App& app) {
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const CLI::Option* opt : app.get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string& name = opt->get_lnames().front();
    if (skipped(name)) continue;
    if (opt->get_expected_max() == 0) {
      cfg[name] = opt->count() > 0 && opt->as<bool>();
      continue;
    }
    if (opt->count() > 0) {
      cfg[name] = opt->results().size() == 1 ? opt->results().front() : opt->as<std::string>();
    } else if (!opt->get_default_str().empty()) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

void write_manifest(const RunManifest& m, const std::string& out_dir) {
  nlohmann::ordered_json j;
  j["tool"] = "clmn";
  j["version"] = CLMN_VERSION;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["config"] = m.config;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& path : m.inputs) inputs[path] = "sha256:" + io::sha256_file(path);
  j["inputs"] = inputs;
  j["outputs"] = m.outputs;
  io::write_file_atomic((std::filesystem::path(out_dir) / "manifest.json").string(),
                        j.dump(2) + "\n");
}

std::string JsonConfig::to_config(const CLI::App* app, bool, bool, std::string) const {
  return collect_config(*app).dump(2) + "\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ConversionError("config is not valid JSON: " + std::string(e.what()));
  }
  std::string command;
  for (const CLI::App* sub : root_->get_subcommands()) command = sub->get_name();
  if (command.empty()) throw CLI::ConversionError("--config needs a subcommand");
  if (j.is_object() && j.contains("config") && j["config"].is_object()) {
    if (j.contains("command") && j["command"] != command) {
      throw CLI::ConversionError("config was written by '" + j["command"].get<std::string>() +
                                 "', not '" + command + "'");
    }
    j = j["config"];
  }
  if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
  std::vector<CLI::ConfigItem> items;
  for (const auto& [key, value] : j.items()) {
    CLI::ConfigItem item;
    item.parents = {command};
    item.name = key;
    if (value.is_string()) {
      item.inputs = {value.get<std::string>()};
    } else if (value.is_boolean()) {
      item.inputs = {value.get<bool>() ? "true" : "false"};
    } else if (value.is_array()) {
      for (const auto& v : value) item.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    } else {
      item.inputs = {value.dump()};
    }
    items.push_back(std::move(item));
  }
  return items;
}

}  // namespace clmn::cli
