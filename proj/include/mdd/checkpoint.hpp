/* Copyright 2026 The mddkit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <fstream>
#include <string>

#include <json.hpp>

#include "mdd/encoders.hpp"
#include "mdd/error.hpp"

// Versioned model checkpoint: JSON with dims, fusion variant, seed and every
// parameter tensor keyed by its canonical name. Doubles are serialized with
// shortest round-trip precision, so save/load is bit-exact.

namespace mdd {

inline const char* gate_kind_name(GateKind kind) {
  switch (kind) {
    case GateKind::kBaselineConcat: return "BaselineConcat";
    case GateKind::kBaselineAdd: return "BaselineAdd";
    case GateKind::kDoubleGate: return "DoubleGate";
    case GateKind::kTextGate: return "TextGate";
    case GateKind::kAudioGate: return "AudioGate";
  }
  return "?";
}

inline GateKind parse_gate_kind(const std::string& name) {
  if (name == "BaselineConcat") return GateKind::kBaselineConcat;
  if (name == "BaselineAdd") return GateKind::kBaselineAdd;
  if (name == "DoubleGate") return GateKind::kDoubleGate;
  if (name == "TextGate") return GateKind::kTextGate;
  if (name == "AudioGate") return GateKind::kAudioGate;
  throw InvalidArgument("unknown gate kind '" + name + "'");
}

inline const char* attn_activation_name(AttnActivation a) {
  switch (a) {
    case AttnActivation::kSigmoid: return "sigmoid";
    case AttnActivation::kSoftmax: return "softmax";
    case AttnActivation::kTanh: return "tanh";
  }
  return "?";
}

inline AttnActivation parse_attn_activation(const std::string& name) {
  if (name == "sigmoid") return AttnActivation::kSigmoid;
  if (name == "softmax") return AttnActivation::kSoftmax;
  if (name == "tanh") return AttnActivation::kTanh;
  throw InvalidArgument("unknown attention activation '" + name + "'");
}

inline nlohmann::json matrix_to_json(const Matrix<double>& m) {
  return nlohmann::json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", m.data()}};
}

inline Matrix<double> matrix_from_json(const nlohmann::json& j, const std::string& name) {
  try {
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    std::vector<double> data = j.at("data").get<std::vector<double>>();
    Matrix<double> m(rows, cols);
    if (data.size() != m.size()) {
      throw ParseError("checkpoint tensor '" + name + "' has wrong element count");
    }
    m.data() = std::move(data);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("checkpoint tensor '" + name + "': " + e.what());
  }
}

inline void save_checkpoint(const std::string& path, ModelParams<double>& model,
                            std::uint64_t seed) {
  nlohmann::json params;
  for (const ParamRef<double>& ref : param_refs(model)) {
    params[ref.name] = matrix_to_json(*ref.matrix);
  }
  const nlohmann::json j{
      {"format", "mdd.checkpoint"},
      {"version", 1},
      {"seed", seed},
      {"dims",
       {{"d_in", model.dims.d_in},
        {"d", model.dims.d},
        {"num_phones", model.dims.num_phones},
        {"audio_blocks", model.dims.audio_blocks},
        {"text_blocks", model.dims.text_blocks},
        {"n_max", model.dims.n_max}}},
      {"variant",
       {{"kind", gate_kind_name(model.variant.kind)},
        {"activation", attn_activation_name(model.variant.activation)},
        {"scale_scores", model.variant.scale_scores},
        {"label", variant_name(model.variant)}}},
      {"params", std::move(params)}};
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open checkpoint '" + path + "' for writing");
  out << j.dump(2) << '\n';
  if (!out) throw InvalidArgument("failed writing checkpoint '" + path + "'");
}

struct LoadedCheckpoint {
  ModelParams<double> model;
  std::uint64_t seed = 0;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open checkpoint '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }

  LoadedCheckpoint loaded;
  try {
    if (j.at("format").get<std::string>() != "mdd.checkpoint") {
      throw ParseError(path + ": not a checkpoint file");
    }
    if (j.at("version").get<int>() != 1) {
      throw ParseError(path + ": unsupported checkpoint version");
    }
    loaded.seed = j.at("seed").get<std::uint64_t>();

    ModelDims dims;
    const nlohmann::json& jd = j.at("dims");
    dims.d_in = jd.at("d_in").get<int>();
    dims.d = jd.at("d").get<int>();
    dims.num_phones = jd.at("num_phones").get<int>();
    dims.audio_blocks = jd.at("audio_blocks").get<int>();
    dims.text_blocks = jd.at("text_blocks").get<int>();
    dims.n_max = jd.at("n_max").get<int>();

    GateVariant variant;
    const nlohmann::json& jv = j.at("variant");
    variant.kind = parse_gate_kind(jv.at("kind").get<std::string>());
    variant.activation = parse_attn_activation(jv.at("activation").get<std::string>());
    variant.scale_scores = jv.at("scale_scores").get<bool>();

    loaded.model = make_zero_params<double>(dims, variant);
    const nlohmann::json& jp = j.at("params");
    for (ParamRef<double>& ref : param_refs(loaded.model)) {
      if (!jp.contains(ref.name)) {
        throw ParseError(path + ": missing tensor '" + ref.name + "'");
      }
      Matrix<double> m = matrix_from_json(jp.at(ref.name), ref.name);
      if (!m.same_shape(*ref.matrix)) {
        throw ParseError(path + ": tensor '" + ref.name + "' has unexpected shape");
      }
      *ref.matrix = std::move(m);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return loaded;
}

}  // namespace mdd
