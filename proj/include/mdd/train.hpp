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

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdd/contrastive.hpp"
#include "mdd/corpus.hpp"
#include "mdd/ctc.hpp"
#include "mdd/encoders.hpp"
#include "mdd/metrics.hpp"
#include "mdd/version.hpp"

// Mini-batch training loop with Adam, per-epoch dev scoring, and MDD
// evaluation. Runs single-threaded; given a seed the whole trajectory
// (shuffles, updates, reports) is reproducible byte for byte.

namespace mdd {

struct TrainConfig {
  std::uint64_t seed = 1;
  std::string variant_label = "TextGate";  // table-style label; "...Contrast"
                                           // enables the contrastive term
  bool scale_scores = false;               // 1/sqrt(d) on fusion attention scores
  double contrast_margin = 16.0;
  double learning_rate = 1e-3;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  int batch_size = 16;
  int epochs = 30;
  int freeze_encoder_steps = 0;
  int model_dim = 32;
  int audio_blocks = 2;
  int text_blocks = 2;
  int n_max = 16;
  bool deterministic = true;  // execution is always single-threaded; recorded
  bool abort_on_infeasible = false;

  void validate() const {
    if (learning_rate <= 0) throw InvalidArgument("learning_rate: must be > 0");
    if (batch_size < 1) throw InvalidArgument("batch_size: must be >= 1");
    if (epochs < 1) throw InvalidArgument("epochs: must be >= 1");
    if (freeze_encoder_steps < 0) throw InvalidArgument("freeze_encoder_steps: must be >= 0");
    if (model_dim < 1) throw InvalidArgument("model_dim: must be >= 1");
    if (audio_blocks < 1) throw InvalidArgument("audio_blocks: must be >= 1");
    if (text_blocks < 1) throw InvalidArgument("text_blocks: must be >= 1");
    if (contrast_margin < 0) throw InvalidArgument("contrast_margin: must be >= 0");
    bool contrast = false;
    parse_variant(variant_label, &contrast);
  }

  GateVariant variant() const {
    bool contrast = false;
    GateVariant v = parse_variant(variant_label, &contrast);
    v.scale_scores = scale_scores;
    return v;
  }
  ContrastConfig contrast() const {
    bool enabled = false;
    parse_variant(variant_label, &enabled);
    return ContrastConfig{contrast_margin, enabled};
  }
};

inline nlohmann::json train_config_to_json(const TrainConfig& c) {
  return nlohmann::json{{"seed", c.seed},
                        {"variant", c.variant_label},
                        {"scale_scores", c.scale_scores},
                        {"contrast_margin", c.contrast_margin},
                        {"learning_rate", c.learning_rate},
                        {"adam_beta1", c.adam_beta1},
                        {"adam_beta2", c.adam_beta2},
                        {"adam_epsilon", c.adam_epsilon},
                        {"batch_size", c.batch_size},
                        {"epochs", c.epochs},
                        {"freeze_encoder_steps", c.freeze_encoder_steps},
                        {"model_dim", c.model_dim},
                        {"audio_blocks", c.audio_blocks},
                        {"text_blocks", c.text_blocks},
                        {"n_max", c.n_max},
                        {"deterministic", c.deterministic},
                        {"abort_on_infeasible", c.abort_on_infeasible}};
}

inline TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  try {
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("variant")) c.variant_label = j.at("variant").get<std::string>();
    if (j.contains("scale_scores")) c.scale_scores = j.at("scale_scores").get<bool>();
    if (j.contains("contrast_margin")) c.contrast_margin = j.at("contrast_margin").get<double>();
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("adam_beta1")) c.adam_beta1 = j.at("adam_beta1").get<double>();
    if (j.contains("adam_beta2")) c.adam_beta2 = j.at("adam_beta2").get<double>();
    if (j.contains("adam_epsilon")) c.adam_epsilon = j.at("adam_epsilon").get<double>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<int>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<int>();
    if (j.contains("freeze_encoder_steps")) {
      c.freeze_encoder_steps = j.at("freeze_encoder_steps").get<int>();
    }
    if (j.contains("model_dim")) c.model_dim = j.at("model_dim").get<int>();
    if (j.contains("audio_blocks")) c.audio_blocks = j.at("audio_blocks").get<int>();
    if (j.contains("text_blocks")) c.text_blocks = j.at("text_blocks").get<int>();
    if (j.contains("n_max")) c.n_max = j.at("n_max").get<int>();
    if (j.contains("deterministic")) c.deterministic = j.at("deterministic").get<bool>();
    if (j.contains("abort_on_infeasible")) {
      c.abort_on_infeasible = j.at("abort_on_infeasible").get<bool>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("train config: ") + e.what());
  }
  return c;
}

// ---------- parameter arithmetic ----------

template <class S>
void add_scaled_params(ModelParams<S>& acc, S scale, ModelParams<S>& delta) {
  auto acc_refs = param_refs(acc);
  auto delta_refs = param_refs(delta);
  for (std::size_t i = 0; i < acc_refs.size(); ++i) {
    axpy(*acc_refs[i].matrix, scale, *delta_refs[i].matrix);
  }
}

template <class S>
void scale_params(ModelParams<S>& p, S scale) {
  for (ParamRef<S>& ref : param_refs(p)) {
    for (S& v : ref.matrix->data()) v *= scale;
  }
}

// Adam with bias correction; one moment pair per parameter tensor.
template <class S>
class AdamOptimizer {
 public:
  AdamOptimizer(ModelParams<S>& params, double lr, double beta1, double beta2, double eps)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (ParamRef<S>& ref : param_refs(params)) {
      m_.emplace_back(ref.matrix->rows(), ref.matrix->cols());
      v_.emplace_back(ref.matrix->rows(), ref.matrix->cols());
    }
  }

  void step(ModelParams<S>& params, ModelParams<S>& grads) {
    ++step_count_;
    const S bc1 = S(1) - static_cast<S>(std::pow(beta1_, step_count_));
    const S bc2 = S(1) - static_cast<S>(std::pow(beta2_, step_count_));
    auto p_refs = param_refs(params);
    auto g_refs = param_refs(grads);
    for (std::size_t i = 0; i < p_refs.size(); ++i) {
      Matrix<S>& p = *p_refs[i].matrix;
      const Matrix<S>& g = *g_refs[i].matrix;
      Matrix<S>& m = m_[i];
      Matrix<S>& v = v_[i];
      for (std::size_t k = 0; k < p.size(); ++k) {
        const S gk = g.data()[k];
        m.data()[k] = static_cast<S>(beta1_) * m.data()[k] + (S(1) - static_cast<S>(beta1_)) * gk;
        v.data()[k] =
            static_cast<S>(beta2_) * v.data()[k] + (S(1) - static_cast<S>(beta2_)) * gk * gk;
        const S m_hat = m.data()[k] / bc1;
        const S v_hat = v.data()[k] / bc2;
        p.data()[k] -= static_cast<S>(lr_) * m_hat / (std::sqrt(v_hat) + static_cast<S>(eps_));
      }
    }
  }

  long step_count() const { return step_count_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  long step_count_ = 0;
  std::vector<Matrix<S>> m_;
  std::vector<Matrix<S>> v_;
};

// ---------- evaluation ----------

enum class HypothesisSource { kModel, kAnnotation, kCanonical };

inline HypothesisSource parse_hypothesis_source(const std::string& name) {
  if (name == "model") return HypothesisSource::kModel;
  if (name == "annotation") return HypothesisSource::kAnnotation;
  if (name == "canonical") return HypothesisSource::kCanonical;
  throw InvalidArgument("unknown hypothesis source '" + name + "'");
}

struct EvalResult {
  int num_utterances = 0;
  double per = 0.0;  // total edit distance over total annotation length
  bool per_degenerate = false;
  MddCounts counts;
  MddRates rates;
  MddColumnShares shares;
};

inline EvalResult evaluate_split(const ModelParams<double>& model,
                                 const std::vector<Utterance>& utts, HypothesisSource source) {
  EvalResult result;
  result.num_utterances = static_cast<int>(utts.size());
  std::int64_t edits = 0;
  std::int64_t ref_len = 0;
  for (const Utterance& utt : utts) {
    PhoneSeq hypothesis;
    switch (source) {
      case HypothesisSource::kModel: {
        const ForwardResult<double> fwd = forward(model, utt.frames, utt.canonical);
        hypothesis = greedy_decode(fwd.lattice);
        break;
      }
      case HypothesisSource::kAnnotation:
        hypothesis = PhoneSeq(utt.annotation.ids, Role::kHypothesis);
        break;
      case HypothesisSource::kCanonical:
        hypothesis = PhoneSeq(utt.canonical.ids, Role::kHypothesis);
        break;
    }
    result.counts += tally(align_triple(utt.canonical, utt.annotation, hypothesis));
    edits += levenshtein_distance(utt.annotation, hypothesis);
    ref_len += utt.annotation.size();
  }
  if (ref_len > 0) {
    result.per = static_cast<double>(edits) / static_cast<double>(ref_len);
  } else {
    result.per_degenerate = true;
  }
  result.rates = rates(result.counts);
  result.rates.per = result.per;
  result.shares = column_shares(result.counts);
  return result;
}

inline nlohmann::json counts_to_json(const MddCounts& c) {
  return nlohmann::json{{"true_accept", c.ta},
                        {"false_rejection", c.fr},
                        {"false_accept", c.fa},
                        {"tr_correct_diag", c.tr_correct_diag},
                        {"tr_diag_error", c.tr_diag_error},
                        {"true_rejection", c.true_rejection()},
                        {"canonical_total", c.canonical_correct()},
                        {"mispronounced_total", c.mispronounced()}};
}

inline nlohmann::json rates_to_json(const MddRates& r) {
  return nlohmann::json{{"precision", r.precision},
                        {"recall", r.recall},
                        {"f1", r.f1},
                        {"correct_diagnosis_rate", r.correct_diagnosis_rate},
                        {"per", r.per},
                        {"degenerate", r.degenerate}};
}

inline nlohmann::json shares_to_json(const MddColumnShares& s) {
  return nlohmann::json{{"true_accept", s.ta},
                        {"false_rejection", s.fr},
                        {"false_accept", s.fa},
                        {"correct_diag", s.correct_diag},
                        {"diag_error", s.diag_error},
                        {"degenerate", s.degenerate}};
}

inline nlohmann::json eval_to_json(const EvalResult& e) {
  return nlohmann::json{{"num_utterances", e.num_utterances},
                        {"per", e.per},
                        {"per_degenerate", e.per_degenerate},
                        {"counts", counts_to_json(e.counts)},
                        {"rates", rates_to_json(e.rates)},
                        {"column_shares", shares_to_json(e.shares)}};
}

// ---------- training ----------

struct RunReport {
  TrainConfig config;
  ModelDims dims;
  std::vector<double> train_loss;  // per epoch, mean over utterances
  std::vector<double> dev_per;     // per epoch
  int skipped_utterances = 0;
  EvalResult test;
};

inline nlohmann::json run_report_to_json(const RunReport& r) {
  return nlohmann::json{
      {"tool", {{"name", kToolName}, {"version", kVersion}}},
      {"config", train_config_to_json(r.config)},
      {"dims",
       {{"d_in", r.dims.d_in},
        {"d", r.dims.d},
        {"num_phones", r.dims.num_phones},
        {"audio_blocks", r.dims.audio_blocks},
        {"text_blocks", r.dims.text_blocks},
        {"n_max", r.dims.n_max}}},
      {"train_loss", r.train_loss},
      {"dev_per", r.dev_per},
      {"skipped_utterances", r.skipped_utterances},
      {"test", eval_to_json(r.test)}};
}

struct TrainOutput {
  ModelParams<double> model;
  RunReport report;
};

// Trains on corpus.train, scores dev PER each epoch and the test split at the
// end. `log` (when set) receives one progress line per epoch.
inline TrainOutput train_model(const SynthCorpus& corpus, const TrainConfig& cfg,
                               std::ostream* log = nullptr) {
  cfg.validate();
  if (corpus.train.empty()) throw InvalidArgument("train: corpus has no training utterances");

  ModelDims dims;
  dims.d_in = corpus.config.feature_dim;
  dims.d = cfg.model_dim;
  dims.num_phones = corpus.inventory.num_phones();
  dims.audio_blocks = cfg.audio_blocks;
  dims.text_blocks = cfg.text_blocks;
  dims.n_max = cfg.n_max;
  for (const std::vector<Utterance>* split : {&corpus.train, &corpus.dev, &corpus.test}) {
    for (const Utterance& utt : *split) {
      dims.n_max = std::max(dims.n_max, utt.canonical.size());
      if (utt.frames.cols() != dims.d_in) {
        throw DimensionError("train: utterance '" + utt.id + "' feature dim " +
                             std::to_string(utt.frames.cols()) + " != corpus feature_dim " +
                             std::to_string(dims.d_in));
      }
    }
  }

  TrainOutput out;
  out.model = init_model_params<double>(cfg.seed, dims, cfg.variant());
  out.report.config = cfg;
  out.report.dims = dims;

  const ContrastConfig contrast = cfg.contrast();
  AdamOptimizer<double> optimizer(out.model, cfg.learning_rate, cfg.adam_beta1, cfg.adam_beta2,
                                  cfg.adam_epsilon);

  Rng shuffle_rng(cfg.seed ^ 0x5DEECE66DULL);
  std::vector<int> order(corpus.train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the dedicated shuffle stream.
    for (int i = static_cast<int>(order.size()) - 1; i > 0; --i) {
      std::swap(order[static_cast<std::size_t>(i)],
                order[static_cast<std::size_t>(shuffle_rng.uniform_int(0, i))]);
    }

    double loss_sum = 0.0;
    int used = 0;
    std::size_t cursor = 0;
    while (cursor < order.size()) {
      const std::size_t batch_end =
          std::min(order.size(), cursor + static_cast<std::size_t>(cfg.batch_size));
      ModelParams<double> batch_grads = make_zero_params<double>(dims, out.model.variant);
      int batch_used = 0;
      double batch_loss = 0.0;
      for (; cursor < batch_end; ++cursor) {
        const Utterance& utt = corpus.train[static_cast<std::size_t>(order[cursor])];
        try {
          ForwardResult<double> fwd = forward(out.model, utt.frames, utt.canonical);
          const LabelPair pair{utt.canonical, utt.annotation};
          CombinedLossResult<double> loss = combined_loss(fwd.lattice, pair, contrast);
          BackwardOptions opts;
          opts.freeze_audio = optimizer.step_count() < cfg.freeze_encoder_steps;
          ModelParams<double> grads = backward(out.model, fwd.trace, loss.lattice_grad, opts);
          add_scaled_params(batch_grads, 1.0, grads);
          batch_loss += loss.loss;
          ++batch_used;
        } catch (const InfeasibleTarget& e) {
          if (cfg.abort_on_infeasible) throw;
          ++out.report.skipped_utterances;
          if (log != nullptr) {
            (*log) << "warning: skipping utterance '" << utt.id << "': " << e.what() << '\n';
          }
        }
      }
      if (batch_used == 0) continue;
      if (!std::isfinite(batch_loss)) {
        throw NumericError("train: non-finite loss at optimizer step " +
                           std::to_string(optimizer.step_count() + 1));
      }
      scale_params(batch_grads, 1.0 / static_cast<double>(batch_used));
      optimizer.step(out.model, batch_grads);
      loss_sum += batch_loss;
      used += batch_used;
    }

    const double epoch_loss = used > 0 ? loss_sum / static_cast<double>(used) : 0.0;
    const EvalResult dev = evaluate_split(out.model, corpus.dev, HypothesisSource::kModel);
    out.report.train_loss.push_back(epoch_loss);
    out.report.dev_per.push_back(dev.per);
    if (log != nullptr) {
      (*log) << "epoch " << (epoch + 1) << "/" << cfg.epochs << " train_loss=" << epoch_loss
             << " dev_per=" << dev.per << '\n';
    }
  }

  out.report.test = evaluate_split(out.model, corpus.test, HypothesisSource::kModel);
  return out;
}

}  // namespace mdd
