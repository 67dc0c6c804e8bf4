// SPDX-License-Identifier: Apache-2.0
#include "clmn/checkpoint.hpp"

#include "clmn/errors.hpp"
#include "clmn/io_util.hpp"

#include <json.hpp>

namespace clmn::ckpt {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr const char* kFormat = "clmn-model";
constexpr int kVersion = 1;

ordered_json tensors_json(const std::vector<std::pair<std::string, const nn::Tensor*>>& tensors) {
  ordered_json arr = ordered_json::array();
  for (const auto& [name, t] : tensors) {
    ordered_json e;
    e["name"] = name;
    e["shape"] = t->shape();
    auto data = t->data();
    e["values"] = std::vector<double>(data.begin(), data.end());
    arr.push_back(std::move(e));
  }
  return arr;
}

nn::ParamSet tensors_from(const json& arr) {
  if (!arr.is_array()) throw ParseError("checkpoint: \"params\" must be an array");
  nn::ParamSet out;
  for (const auto& e : arr) {
    const auto name = e.at("name").get<std::string>();
    const auto shape = e.at("shape").get<nn::Shape>();
    const auto values = e.at("values").get<std::vector<double>>();
    try {
      out.add(name, nn::Tensor(shape, values));
    } catch (const Error& err) {
      throw ParseError("checkpoint: parameter " + name + ": " + err.what());
    }
  }
  return out;
}

std::string encoder_kind(embed::EncoderKind k) {
  return k == embed::EncoderKind::kStaticLookup ? "static-lookup" : "synthetic-contextual";
}

embed::EncoderKind encoder_kind_from(const std::string& s) {
  if (s == "static-lookup") return embed::EncoderKind::kStaticLookup;
  if (s == "synthetic-contextual") return embed::EncoderKind::kSyntheticContextual;
  throw ParseError("checkpoint: unknown encoder kind " + s);
}

match::MatchModelParams split_model(nn::ParamSet& all, const std::string& prefix,
                                    const match::MatchDims& dims) {
  nn::ParamSet mine;
  for (auto& [name, t] : all) {
    if (name.rfind(prefix, 0) == 0) mine.add(name.substr(prefix.size()), t);
  }
  return match::MatchModelParams::from_params(dims, std::move(mine));
}

}  // namespace

std::string params_to_json(const std::vector<std::pair<std::string, const nn::Tensor*>>& tensors) {
  ordered_json j;
  j["params"] = tensors_json(tensors);
  return j.dump() + "\n";
}

nn::ParamSet params_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
    return tensors_from(j.at("params"));
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

std::string bundle_to_json(const ModelBundle& b) {
  const auto& m = b.model;
  ordered_json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["mode"] = match::to_string(m.mode());
  j["freeze_mapping"] = m.freeze_mapping();
  j["beta"] = m.w_ch2en().beta();
  j["dims"] = {{"d_model", m.en().dims().d_model},
               {"d_hidden", m.en().dims().d_hidden},
               {"levels", m.en().dims().levels}};
  j["encoder"] = {{"kind", encoder_kind(b.encoder.kind)},
                  {"dim", b.encoder.dim},
                  {"seed", b.encoder.seed},
                  {"lambda", b.encoder.lambda}};
  j["max_len_attr"] = b.max_len_attr;
  j["max_len_desc"] = b.max_len_desc;
  j["params"] = tensors_json(m.all_tensors());
  return j.dump() + "\n";
}

ModelBundle bundle_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != kFormat) throw ParseError("checkpoint: wrong format tag");
    if (j.at("version").get<int>() != kVersion) throw ParseError("checkpoint: unsupported version");
    match::MatchDims dims;
    dims.d_model = j.at("dims").at("d_model").get<std::size_t>();
    dims.d_hidden = j.at("dims").at("d_hidden").get<std::size_t>();
    dims.levels = j.at("dims").at("levels").get<std::size_t>();
    const double beta = j.at("beta").get<double>();

    nn::ParamSet all = tensors_from(j.at("params"));
    match::MatchModelParams en = split_model(all, "en.", dims);
    match::MatchModelParams ch = split_model(all, "ch.", dims);
    align::MappingMatrix w1(all.at("mapping.ch2en"), align::Direction::kCh2En, beta);
    align::MappingMatrix w2(all.at("mapping.en2ch"), align::Direction::kEn2Ch, beta);

    embed::EncoderSpec enc;
    enc.kind = encoder_kind_from(j.at("encoder").at("kind").get<std::string>());
    enc.dim = j.at("encoder").at("dim").get<std::size_t>();
    enc.seed = j.at("encoder").at("seed").get<std::uint64_t>();
    enc.lambda = j.at("encoder").at("lambda").get<double>();

    return ModelBundle{
        match::ClmnModel(match::mode_from_string(j.at("mode").get<std::string>()), std::move(en),
                         std::move(ch), std::move(w1), std::move(w2),
                         j.at("freeze_mapping").get<bool>()),
        enc, j.at("max_len_attr").get<std::size_t>(), j.at("max_len_desc").get<std::size_t>()};
  } catch (const json::exception& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  }
}

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  io::write_file_atomic(path, bundle_to_json(bundle));
}

ModelBundle load_bundle(const std::string& path) { return bundle_from_json(io::read_file(path)); }

}  // namespace clmn::ckpt
