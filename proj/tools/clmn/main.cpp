// SPDX-License-Identifier: Apache-2.0
#include "commands.hpp"
#include "manifest.hpp"

#include "clmn/errors.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <memory>
#include <utility>
#include <vector>

#ifndef CLMN_VERSION
#define CLMN_VERSION "0.0.0"
#endif

int main(int argc, char** argv) {
  CLI::App app{"Cross-lingual set-to-description matching"};
  app.set_version_flag("--version", CLMN_VERSION);
  app.require_subcommand(1);
  // Subcommands pass --config up to the root, which applies it to them.
  app.fallthrough(true);
  app.set_config("--config", "", "JSON file of option values or a manifest.json to replay; flags on the command line win");
  app.config_formatter(std::make_shared<clmn::cli::JsonConfig>(&app));
  app.failure_message(CLI::FailureMessage::help);

  std::vector<std::pair<CLI::App*, clmn::cli::Runner>> commands;
  for (auto add : {clmn::cli::add_generate, clmn::cli::add_anchors, clmn::cli::add_align,
                   clmn::cli::add_train, clmn::cli::add_eval, clmn::cli::add_baseline}) {
    clmn::cli::Runner run = add(app);
    commands.emplace_back(app.get_subcommands({}).back(), std::move(run));
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    for (auto& [sub, run] : commands) {
      if (sub->parsed()) run();
    }
  } catch (const clmn::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
