// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "clmn/encoder.hpp"
#include "clmn/matcher.hpp"

#include <string>
#include <vector>

namespace clmn::ckpt {

/// A trained model together with everything needed to feed it: the encoder
/// settings and the truncation limits it was trained with.
struct ModelBundle {
  match::ClmnModel model;
  embed::EncoderSpec encoder;
  std::size_t max_len_attr = 50;
  std::size_t max_len_desc = 100;
};

/// Named tensors as {"name", "shape", "values"} objects, values row-major.
std::string params_to_json(const std::vector<std::pair<std::string, const nn::Tensor*>>& tensors);
nn::ParamSet params_from_json(const std::string& text);

std::string bundle_to_json(const ModelBundle& bundle);
ModelBundle bundle_from_json(const std::string& text);

/// Atomic write (temp file + rename).
void save_bundle(const ModelBundle& bundle, const std::string& path);
ModelBundle load_bundle(const std::string& path);

}  // namespace clmn::ckpt
