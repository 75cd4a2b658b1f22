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

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdd/error.hpp"
#include "mdd/matrix.hpp"
#include "mdd/phone.hpp"
#include "mdd/rng.hpp"

// Deterministic synthetic second-language speech: canonical phone sequences,
// annotations derived from them by a per-phone substitution/deletion process,
// and per-frame acoustic features built from fixed per-phone prototype
// vectors plus Gaussian noise. The acoustics follow the ANNOTATION (what was
// said), not the canonical prompt. Everything is a pure function of the seed.

namespace mdd {

enum class PrototypeScheme { kGaussian, kSphere };

inline const char* prototype_scheme_name(PrototypeScheme s) {
  return s == PrototypeScheme::kGaussian ? "gaussian" : "sphere";
}

inline PrototypeScheme parse_prototype_scheme(const std::string& name) {
  if (name == "gaussian") return PrototypeScheme::kGaussian;
  if (name == "sphere") return PrototypeScheme::kSphere;
  throw InvalidArgument("prototype_scheme: unknown scheme '" + name + "'");
}

struct CorpusConfig {
  std::uint64_t seed = 1;
  int inventory_size = 12;
  int utterance_count = 1000;
  int min_length = 4;
  int max_length = 12;
  double p_substitution = 0.15;
  double p_deletion = 0.02;
  double p_insertion = 0.0;
  int min_frames_per_phone = 2;
  int max_frames_per_phone = 5;
  int feature_dim = 16;
  double noise_sigma = 0.3;
  PrototypeScheme prototype_scheme = PrototypeScheme::kGaussian;

  void validate() const {
    if (inventory_size < 1) throw InvalidArgument("inventory_size: must be >= 1");
    if (utterance_count < 0) throw InvalidArgument("utterance_count: must be >= 0");
    if (min_length < 1 || max_length < min_length) {
      throw InvalidArgument("min_length/max_length: need 1 <= min <= max");
    }
    auto check_rate = [](double rate, const char* field) {
      if (!(rate >= 0.0 && rate <= 1.0)) {
        throw InvalidArgument(std::string(field) + ": rate must lie in [0, 1]");
      }
    };
    check_rate(p_substitution, "p_substitution");
    check_rate(p_deletion, "p_deletion");
    check_rate(p_insertion, "p_insertion");
    if (p_substitution + p_deletion > 1.0) {
      throw InvalidArgument("p_substitution: p_substitution + p_deletion must be <= 1");
    }
    if ((p_substitution > 0.0 || p_insertion > 0.0) && inventory_size < 2) {
      throw InvalidArgument("inventory_size: substitutions need at least two phones");
    }
    if (min_frames_per_phone < 1 || max_frames_per_phone < min_frames_per_phone) {
      throw InvalidArgument("min_frames_per_phone/max_frames_per_phone: need 1 <= min <= max");
    }
    if (feature_dim < 1) throw InvalidArgument("feature_dim: must be >= 1");
    if (noise_sigma < 0.0) throw InvalidArgument("noise_sigma: must be >= 0");
  }
};

struct Utterance {
  std::string id;
  PhoneSeq canonical;
  PhoneSeq annotation;
  Matrix<double> frames;  // T x feature_dim, T = sum of annotation durations
};

struct SynthCorpus {
  CorpusConfig config;
  PhoneInventory inventory;
  Matrix<double> prototypes;  // V x feature_dim
  std::vector<Utterance> train;
  std::vector<Utterance> dev;
  std::vector<Utterance> test;
};

namespace detail {

// Frames needed for a CTC-representable target: one per label plus one
// separating blank per adjacent repeat.
inline int min_ctc_frames(const std::vector<int>& ids) {
  int needed = static_cast<int>(ids.size());
  for (std::size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] == ids[i - 1]) ++needed;
  }
  return needed;
}

inline std::vector<int> derive_annotation(const std::vector<int>& canonical,
                                          const CorpusConfig& cfg, Rng& rng) {
  std::vector<int> out;
  out.reserve(canonical.size());
  auto random_other_phone = [&](int id) {
    const int r = rng.uniform_int(1, cfg.inventory_size - 1);
    return r < id ? r : r + 1;
  };
  for (int id : canonical) {
    const double u = rng.uniform();
    if (u < cfg.p_deletion) {
      // deleted
    } else if (u < cfg.p_deletion + cfg.p_substitution) {
      out.push_back(random_other_phone(id));
    } else {
      out.push_back(id);
    }
    if (cfg.p_insertion > 0.0 && rng.uniform() < cfg.p_insertion) {
      out.push_back(rng.uniform_int(1, cfg.inventory_size));
    }
  }
  return out;
}

}  // namespace detail

inline SynthCorpus generate_corpus(const CorpusConfig& config) {
  config.validate();
  SynthCorpus corpus;
  corpus.config = config;
  corpus.inventory = PhoneInventory::with_generic_symbols(config.inventory_size);

  Rng rng(config.seed);
  corpus.prototypes = Matrix<double>(config.inventory_size, config.feature_dim);
  for (int v = 0; v < config.inventory_size; ++v) {
    double norm_sq = 0.0;
    for (int j = 0; j < config.feature_dim; ++j) {
      const double x = rng.normal();
      corpus.prototypes(v, j) = x;
      norm_sq += x * x;
    }
    if (config.prototype_scheme == PrototypeScheme::kSphere && norm_sq > 0.0) {
      const double scale = std::sqrt(static_cast<double>(config.feature_dim) / norm_sq);
      for (int j = 0; j < config.feature_dim; ++j) corpus.prototypes(v, j) *= scale;
    }
  }

  std::vector<Utterance> all;
  all.reserve(static_cast<std::size_t>(config.utterance_count));
  for (int idx = 0; idx < config.utterance_count; ++idx) {
    Utterance utt;
    char buf[24];
    std::snprintf(buf, sizeof(buf), "utt-%06d", idx);
    utt.id = buf;

    const int length = rng.uniform_int(config.min_length, config.max_length);
    utt.canonical.role = Role::kCanonical;
    utt.canonical.ids.resize(static_cast<std::size_t>(length));
    for (int i = 0; i < length; ++i) {
      utt.canonical.ids[static_cast<std::size_t>(i)] = rng.uniform_int(1, config.inventory_size);
    }

    utt.annotation.role = Role::kAnnotation;
    for (int attempt = 0;; ++attempt) {
      utt.annotation.ids = detail::derive_annotation(utt.canonical.ids, config, rng);
      if (!utt.annotation.ids.empty()) break;
      if (attempt >= 1000) {
        throw InvalidArgument("generate_corpus: could not derive a non-empty annotation");
      }
    }

    const int num_phones = static_cast<int>(utt.annotation.ids.size());
    const int needed = detail::min_ctc_frames(utt.annotation.ids);
    std::vector<int> durations(static_cast<std::size_t>(num_phones), 0);
    for (int attempt = 0;; ++attempt) {
      int total = 0;
      for (int i = 0; i < num_phones; ++i) {
        durations[static_cast<std::size_t>(i)] =
            rng.uniform_int(config.min_frames_per_phone, config.max_frames_per_phone);
        total += durations[static_cast<std::size_t>(i)];
      }
      if (total >= needed) break;
      if (attempt >= 1000) {
        throw InvalidArgument("generate_corpus: could not sample CTC-feasible durations");
      }
    }

    int total_frames = 0;
    for (int dur : durations) total_frames += dur;
    utt.frames = Matrix<double>(total_frames, config.feature_dim);
    int row = 0;
    for (int i = 0; i < num_phones; ++i) {
      const int proto_row = utt.annotation.ids[static_cast<std::size_t>(i)] - 1;
      for (int r = 0; r < durations[static_cast<std::size_t>(i)]; ++r, ++row) {
        for (int j = 0; j < config.feature_dim; ++j) {
          utt.frames(row, j) =
              corpus.prototypes(proto_row, j) + config.noise_sigma * rng.normal();
        }
      }
    }
    all.push_back(std::move(utt));
  }

  // 70/10/20 split by utterance index.
  const int n = static_cast<int>(all.size());
  const int n_train = n * 7 / 10;
  const int n_dev = n / 10;
  for (int i = 0; i < n; ++i) {
    if (i < n_train) {
      corpus.train.push_back(std::move(all[static_cast<std::size_t>(i)]));
    } else if (i < n_train + n_dev) {
      corpus.dev.push_back(std::move(all[static_cast<std::size_t>(i)]));
    } else {
      corpus.test.push_back(std::move(all[static_cast<std::size_t>(i)]));
    }
  }
  return corpus;
}

// ---------- serialization ----------

inline nlohmann::json corpus_config_to_json(const CorpusConfig& c) {
  return nlohmann::json{{"seed", c.seed},
                        {"inventory_size", c.inventory_size},
                        {"utterance_count", c.utterance_count},
                        {"min_length", c.min_length},
                        {"max_length", c.max_length},
                        {"p_substitution", c.p_substitution},
                        {"p_deletion", c.p_deletion},
                        {"p_insertion", c.p_insertion},
                        {"min_frames_per_phone", c.min_frames_per_phone},
                        {"max_frames_per_phone", c.max_frames_per_phone},
                        {"feature_dim", c.feature_dim},
                        {"noise_sigma", c.noise_sigma},
                        {"prototype_scheme", prototype_scheme_name(c.prototype_scheme)}};
}

inline CorpusConfig corpus_config_from_json(const nlohmann::json& j) {
  CorpusConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("inventory_size")) c.inventory_size = j.at("inventory_size").get<int>();
    if (j.contains("utterance_count")) c.utterance_count = j.at("utterance_count").get<int>();
    if (j.contains("min_length")) c.min_length = j.at("min_length").get<int>();
    if (j.contains("max_length")) c.max_length = j.at("max_length").get<int>();
    if (j.contains("p_substitution")) c.p_substitution = j.at("p_substitution").get<double>();
    if (j.contains("p_deletion")) c.p_deletion = j.at("p_deletion").get<double>();
    if (j.contains("p_insertion")) c.p_insertion = j.at("p_insertion").get<double>();
    if (j.contains("min_frames_per_phone")) {
      c.min_frames_per_phone = j.at("min_frames_per_phone").get<int>();
    }
    if (j.contains("max_frames_per_phone")) {
      c.max_frames_per_phone = j.at("max_frames_per_phone").get<int>();
    }
    if (j.contains("feature_dim")) c.feature_dim = j.at("feature_dim").get<int>();
    if (j.contains("noise_sigma")) c.noise_sigma = j.at("noise_sigma").get<double>();
    if (j.contains("prototype_scheme")) {
      c.prototype_scheme = parse_prototype_scheme(j.at("prototype_scheme").get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("corpus config: ") + e.what());
  }
  return c;
}

inline nlohmann::json utterance_to_json(const Utterance& utt) {
  nlohmann::json frames = nlohmann::json::array();
  for (int t = 0; t < utt.frames.rows(); ++t) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < utt.frames.cols(); ++j) row.push_back(utt.frames(t, j));
    frames.push_back(std::move(row));
  }
  return nlohmann::json{{"id", utt.id},
                        {"canonical", utt.canonical.ids},
                        {"annotation", utt.annotation.ids},
                        {"frames", std::move(frames)}};
}

inline Utterance utterance_from_json(const nlohmann::json& j, const std::string& where) {
  try {
    Utterance utt;
    utt.id = j.at("id").get<std::string>();
    utt.canonical = PhoneSeq(j.at("canonical").get<std::vector<int>>(), Role::kCanonical);
    utt.annotation = PhoneSeq(j.at("annotation").get<std::vector<int>>(), Role::kAnnotation);
    const nlohmann::json& frames = j.at("frames");
    const int rows = static_cast<int>(frames.size());
    const int cols = rows > 0 ? static_cast<int>(frames.at(0).size()) : 0;
    utt.frames = Matrix<double>(rows, cols);
    for (int t = 0; t < rows; ++t) {
      const nlohmann::json& row = frames.at(static_cast<std::size_t>(t));
      if (static_cast<int>(row.size()) != cols) {
        throw ParseError(where + ": ragged frame rows");
      }
      for (int c = 0; c < cols; ++c) {
        utt.frames(t, c) = row.at(static_cast<std::size_t>(c)).get<double>();
      }
    }
    return utt;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(where + ": " + e.what());
  }
}

// One JSON record per line.
inline void write_corpus_file(const std::vector<Utterance>& utts, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  for (const Utterance& utt : utts) {
    out << utterance_to_json(utt).dump() << '\n';
  }
  if (!out) throw InvalidArgument("failed writing '" + path + "'");
}

inline std::vector<Utterance> read_corpus_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open corpus file '" + path + "'");
  std::vector<Utterance> utts;
  std::string line;
  int record = 0;
  while (std::getline(in, line)) {
    ++record;
    if (line.empty()) continue;
    const std::string where = path + ": record " + std::to_string(record);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(where + ": " + e.what());
    }
    utts.push_back(utterance_from_json(j, where));
  }
  return utts;
}

inline void write_corpus_dir(const SynthCorpus& corpus, const std::string& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::json manifest{
      {"format", "mdd.corpus"},
      {"version", 1},
      {"config", corpus_config_to_json(corpus.config)},
      {"phones", corpus.inventory.phones},
      {"splits",
       {{"train", corpus.train.size()}, {"dev", corpus.dev.size()}, {"test", corpus.test.size()}}}};
  std::ofstream out(dir + "/manifest.json");
  if (!out) throw InvalidArgument("cannot open '" + dir + "/manifest.json' for writing");
  out << manifest.dump(2) << '\n';
  write_corpus_file(corpus.train, dir + "/train.jsonl");
  write_corpus_file(corpus.dev, dir + "/dev.jsonl");
  write_corpus_file(corpus.test, dir + "/test.jsonl");
}

inline SynthCorpus read_corpus_dir(const std::string& dir) {
  std::ifstream in(dir + "/manifest.json");
  if (!in) throw InvalidArgument("cannot open corpus manifest '" + dir + "/manifest.json'");
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(dir + "/manifest.json: " + std::string(e.what()));
  }
  SynthCorpus corpus;
  try {
    if (manifest.at("format").get<std::string>() != "mdd.corpus") {
      throw ParseError(dir + "/manifest.json: not a corpus manifest");
    }
    corpus.config = corpus_config_from_json(manifest.at("config"));
    corpus.inventory.phones = manifest.at("phones").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(dir + "/manifest.json: " + std::string(e.what()));
  }
  corpus.inventory.validate();
  corpus.train = read_corpus_file(dir + "/train.jsonl");
  corpus.dev = read_corpus_file(dir + "/dev.jsonl");
  corpus.test = read_corpus_file(dir + "/test.jsonl");
  return corpus;
}

}  // namespace mdd
