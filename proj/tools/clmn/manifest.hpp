// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace clmn::cli {

/// Record of one command invocation, written before any output artifact.
struct RunManifest {
  std::string command;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::uint64_t seed = 0;
};

/// Resolved value of every named option of `app` (defaults included),
/// keyed by long name without dashes.
nlohmann::ordered_json collect_config(const CLI::App& app);

/// Hashes every input and writes <out_dir>/manifest.json atomically.
void write_manifest(const RunManifest& m, const std::string& out_dir);

/// Reads flat {"key": value} JSON config files for whichever subcommand of
/// `root` was parsed. A manifest.json is accepted too: its "config" object
/// is used, and its "command" must match the subcommand.
class JsonConfig : public CLI::Config {
 public:
  explicit JsonConfig(const CLI::App* root) : root_(root) {}
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;

 private:
  const CLI::App* root_;
};

}  // namespace clmn::cli
