// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <CLI11.hpp>

#include <functional>

namespace clmn::cli {

using Runner = std::function<void()>;

// Each registers one subcommand on `app` and returns the action to run when
// that subcommand was selected.
Runner add_generate(CLI::App& app);
Runner add_anchors(CLI::App& app);
Runner add_align(CLI::App& app);
Runner add_train(CLI::App& app);
Runner add_eval(CLI::App& app);
Runner add_baseline(CLI::App& app);

}  // namespace clmn::cli
