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

// Command-line driver: corpus synthesis, training, evaluation, standalone
// scoring, oracle self-checks and variant comparison sweeps.
//
// Exit codes: 0 success, 1 usage/config error, 2 oracle or self-check
// failure, 3 runtime numeric failure.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdd/checkpoint.hpp"
#include "mdd/corpus.hpp"
#include "mdd/metrics.hpp"
#include "mdd/selfcheck.hpp"
#include "mdd/train.hpp"
#include "mdd/version.hpp"

namespace {

using nlohmann::json;

std::string format_double(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, value);
  return buf;
}

std::string format_pct(double fraction) { return format_double(mdd::percent_2dp(fraction), 2); }

void print_table(const std::vector<std::vector<std::string>>& rows, std::ostream& out) {
  if (rows.empty()) return;
  std::vector<std::size_t> widths(rows[0].size(), 0);
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << row[c];
      if (c + 1 < row.size()) out << std::string(widths[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  }
}

void write_report_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw mdd::InvalidArgument("cannot open report file '" + path + "' for writing");
  out << j.dump(2) << '\n';
}

std::vector<std::string> mdd_counts_row(const std::string& name, const mdd::MddCounts& counts) {
  const mdd::MddRates r = mdd::rates(counts);
  const mdd::MddColumnShares s = mdd::column_shares(counts);
  return {name,
          format_pct(s.ta) + "% (" + std::to_string(counts.ta) + ")",
          format_pct(s.fr) + "% (" + std::to_string(counts.fr) + ")",
          format_pct(s.fa) + "% (" + std::to_string(counts.fa) + ")",
          format_pct(s.correct_diag) + "% (" + std::to_string(counts.tr_correct_diag) + ")",
          format_pct(s.diag_error) + "% (" + std::to_string(counts.tr_diag_error) + ")",
          format_pct(r.f1) + "%"};
}

const std::vector<std::string> kMddHeader = {"model",         "true-accept", "false-reject",
                                             "false-accept",  "correct-diag", "diag-error",
                                             "f1"};

json score_json(const mdd::MddCounts& counts) {
  const mdd::MddRates r = mdd::rates(counts);
  return json{{"counts", mdd::counts_to_json(counts)},
              {"rates", mdd::rates_to_json(r)},
              {"column_shares", mdd::shares_to_json(mdd::column_shares(counts))}};
}

// ---------- synth ----------

struct SynthArgs {
  std::string out_dir;
  std::string config_path;
  mdd::CorpusConfig config;
  CLI::App* cmd = nullptr;
};

int run_synth(SynthArgs& args) {
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw mdd::InvalidArgument("cannot open config '" + args.config_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw mdd::ParseError(args.config_path + ": " + e.what());
    }
    mdd::CorpusConfig from_file = mdd::corpus_config_from_json(j);
    // Flags the user passed explicitly override the file.
    auto keep = [&](const char* flag) { return args.cmd->count(flag) > 0; };
    if (!keep("--seed")) args.config.seed = from_file.seed;
    if (!keep("--utterances")) args.config.utterance_count = from_file.utterance_count;
    if (!keep("--inventory")) args.config.inventory_size = from_file.inventory_size;
    if (!keep("--min-len")) args.config.min_length = from_file.min_length;
    if (!keep("--max-len")) args.config.max_length = from_file.max_length;
    if (!keep("--p-sub")) args.config.p_substitution = from_file.p_substitution;
    if (!keep("--p-del")) args.config.p_deletion = from_file.p_deletion;
    if (!keep("--p-ins")) args.config.p_insertion = from_file.p_insertion;
    if (!keep("--min-frames")) args.config.min_frames_per_phone = from_file.min_frames_per_phone;
    if (!keep("--max-frames")) args.config.max_frames_per_phone = from_file.max_frames_per_phone;
    if (!keep("--feature-dim")) args.config.feature_dim = from_file.feature_dim;
    if (!keep("--noise-sigma")) args.config.noise_sigma = from_file.noise_sigma;
    if (!keep("--prototype-scheme")) args.config.prototype_scheme = from_file.prototype_scheme;
  }
  const mdd::SynthCorpus corpus = mdd::generate_corpus(args.config);
  mdd::write_corpus_dir(corpus, args.out_dir);
  std::cout << "wrote corpus to " << args.out_dir << ": train=" << corpus.train.size()
            << " dev=" << corpus.dev.size() << " test=" << corpus.test.size() << '\n';
  return 0;
}

// ---------- train ----------

struct TrainArgs {
  std::string corpus_dir;
  std::string checkpoint_path;
  std::string report_path;
  std::string config_path;
  mdd::TrainConfig config;
  CLI::App* cmd = nullptr;
};

mdd::TrainConfig resolve_train_config(const TrainArgs& args) {
  mdd::TrainConfig cfg = args.config;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in) throw mdd::InvalidArgument("cannot open config '" + args.config_path + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw mdd::ParseError(args.config_path + ": " + e.what());
    }
    mdd::TrainConfig from_file = mdd::train_config_from_json(j);
    auto keep = [&](const char* flag) { return args.cmd->count(flag) > 0; };
    if (!keep("--seed")) cfg.seed = from_file.seed;
    if (!keep("--variant")) cfg.variant_label = from_file.variant_label;
    if (!keep("--scale-scores")) cfg.scale_scores = from_file.scale_scores;
    if (!keep("--contrast-margin")) cfg.contrast_margin = from_file.contrast_margin;
    if (!keep("--lr")) cfg.learning_rate = from_file.learning_rate;
    if (!keep("--batch-size")) cfg.batch_size = from_file.batch_size;
    if (!keep("--epochs")) cfg.epochs = from_file.epochs;
    if (!keep("--freeze-steps")) cfg.freeze_encoder_steps = from_file.freeze_encoder_steps;
    if (!keep("--model-dim")) cfg.model_dim = from_file.model_dim;
    if (!keep("--n-max")) cfg.n_max = from_file.n_max;
    if (!keep("--deterministic")) cfg.deterministic = from_file.deterministic;
    if (!keep("--abort-on-infeasible")) cfg.abort_on_infeasible = from_file.abort_on_infeasible;
  }
  return cfg;
}

void print_run_summary(const std::string& label, const mdd::RunReport& report,
                       std::ostream& out) {
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"model", "final-loss", "dev-per", "test-per", "f1"});
  rows.push_back({label,
                  report.train_loss.empty() ? "-" : format_double(report.train_loss.back(), 4),
                  report.dev_per.empty() ? "-" : format_double(report.dev_per.back(), 4),
                  format_double(report.test.per, 4), format_pct(report.test.rates.f1) + "%"});
  print_table(rows, out);
  std::vector<std::vector<std::string>> counts_rows{kMddHeader,
                                                    mdd_counts_row(label, report.test.counts)};
  print_table(counts_rows, out);
}

int run_train(TrainArgs& args) {
  const mdd::TrainConfig cfg = resolve_train_config(args);
  cfg.validate();
  const mdd::SynthCorpus corpus = mdd::read_corpus_dir(args.corpus_dir);
  mdd::TrainOutput out = mdd::train_model(corpus, cfg, &std::cerr);
  mdd::save_checkpoint(args.checkpoint_path, out.model, cfg.seed);
  if (!args.report_path.empty()) {
    write_report_file(mdd::run_report_to_json(out.report), args.report_path);
  }
  print_run_summary(cfg.variant_label, out.report, std::cout);
  return 0;
}

// ---------- eval ----------

struct EvalArgs {
  std::string checkpoint_path;
  std::string corpus_file;
  std::string report_path;
  std::string hypothesis = "model";
};

int run_eval(const EvalArgs& args) {
  const mdd::LoadedCheckpoint loaded = mdd::load_checkpoint(args.checkpoint_path);
  const std::vector<mdd::Utterance> utts = mdd::read_corpus_file(args.corpus_file);
  for (const mdd::Utterance& utt : utts) {
    if (utt.frames.cols() != loaded.model.dims.d_in) {
      throw mdd::DimensionError("eval: utterance '" + utt.id + "' feature dim " +
                                std::to_string(utt.frames.cols()) + " != checkpoint d_in " +
                                std::to_string(loaded.model.dims.d_in));
    }
  }
  const mdd::HypothesisSource source = mdd::parse_hypothesis_source(args.hypothesis);
  const mdd::EvalResult result = mdd::evaluate_split(loaded.model, utts, source);
  if (!args.report_path.empty()) {
    json j{{"tool", {{"name", mdd::kToolName}, {"version", mdd::kVersion}}},
           {"checkpoint", args.checkpoint_path},
           {"corpus", args.corpus_file},
           {"hypothesis", args.hypothesis},
           {"eval", mdd::eval_to_json(result)}};
    write_report_file(j, args.report_path);
  }
  std::cout << "utterances=" << result.num_utterances << " per=" << format_double(result.per, 4)
            << '\n';
  print_table({kMddHeader, mdd_counts_row(args.hypothesis, result.counts)}, std::cout);
  return 0;
}

// ---------- score ----------

struct ScoreArgs {
  std::vector<long long> counts;
  std::string counts_file;
  std::string triples_file;
  std::string report_path;
  bool as_json = false;
};

mdd::MddCounts counts_from_values(const std::vector<long long>& v) {
  for (long long value : v) {
    if (value < 0) throw mdd::InvalidArgument("score: counts must be non-negative");
  }
  mdd::MddCounts c;
  c.ta = v[0];
  c.fr = v[1];
  c.fa = v[2];
  c.tr_correct_diag = v[3];
  c.tr_diag_error = v[4];
  return c;
}

int run_score(const ScoreArgs& args) {
  json report;
  std::vector<std::vector<std::string>> table{kMddHeader};

  const int modes = (args.counts.empty() ? 0 : 1) + (args.counts_file.empty() ? 0 : 1) +
                    (args.triples_file.empty() ? 0 : 1);
  if (modes != 1) {
    throw mdd::InvalidArgument(
        "score: pass exactly one of --counts, --counts-file, --triples");
  }

  if (!args.counts.empty()) {
    const mdd::MddCounts counts = counts_from_values(args.counts);
    report = score_json(counts);
    table.push_back(mdd_counts_row("counts", counts));
  } else if (!args.counts_file.empty()) {
    std::ifstream in(args.counts_file);
    if (!in) throw mdd::InvalidArgument("cannot open counts file '" + args.counts_file + "'");
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw mdd::ParseError(args.counts_file + ": " + e.what());
    }
    json rows = json::array();
    try {
      for (const json& row : j.at("rows")) {
        mdd::MddCounts counts;
        counts.ta = row.at("ta").get<long long>();
        counts.fr = row.at("fr").get<long long>();
        counts.fa = row.at("fa").get<long long>();
        counts.tr_correct_diag = row.at("cd").get<long long>();
        counts.tr_diag_error = row.at("de").get<long long>();
        const std::string name = row.value("name", "row" + std::to_string(rows.size()));
        json entry = score_json(counts);
        entry["name"] = name;
        rows.push_back(std::move(entry));
        table.push_back(mdd_counts_row(name, counts));
      }
    } catch (const json::exception& e) {
      throw mdd::ParseError(args.counts_file + ": " + e.what());
    }
    report = json{{"rows", std::move(rows)}};
  } else {
    std::ifstream in(args.triples_file);
    if (!in) throw mdd::InvalidArgument("cannot open triples file '" + args.triples_file + "'");
    mdd::MddCounts counts;
    std::int64_t edits = 0;
    std::int64_t ref_len = 0;
    std::string line;
    int record = 0;
    int used = 0;
    while (std::getline(in, line)) {
      ++record;
      if (line.empty()) continue;
      const std::string where = args.triples_file + ": record " + std::to_string(record);
      json j;
      try {
        j = json::parse(line);
      } catch (const json::exception& e) {
        throw mdd::ParseError(where + ": " + e.what());
      }
      try {
        const mdd::PhoneSeq canonical(j.at("canonical").get<std::vector<int>>(),
                                      mdd::Role::kCanonical);
        const mdd::PhoneSeq annotation(j.at("annotation").get<std::vector<int>>(),
                                       mdd::Role::kAnnotation);
        const mdd::PhoneSeq hypothesis(j.at("hypothesis").get<std::vector<int>>(),
                                       mdd::Role::kHypothesis);
        counts += mdd::tally(mdd::align_triple(canonical, annotation, hypothesis));
        edits += mdd::levenshtein_distance(annotation, hypothesis);
        ref_len += annotation.size();
        ++used;
      } catch (const json::exception& e) {
        throw mdd::ParseError(where + ": " + e.what());
      }
    }
    report = score_json(counts);
    report["num_utterances"] = used;
    report["per"] = ref_len > 0 ? static_cast<double>(edits) / static_cast<double>(ref_len) : 0.0;
    report["per_degenerate"] = ref_len == 0;
    table.push_back(mdd_counts_row("triples", counts));
  }

  if (!args.report_path.empty()) write_report_file(report, args.report_path);
  if (args.as_json) {
    std::cout << report.dump(2) << '\n';
  } else {
    print_table(table, std::cout);
  }
  return 0;
}

// ---------- oracle ----------

int run_oracle(std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<mdd::selfcheck::OracleReport> reports = mdd::selfcheck::run_all_oracles(seed);
  const bool ok = mdd::selfcheck::print_oracle_reports(reports, std::cout);
  const auto t1 = std::chrono::steady_clock::now();
  std::cerr << "oracle wall time: "
            << std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() << " ms\n";
  if (!ok) {
    std::cout << "oracle: FAILURES DETECTED\n";
    return 2;
  }
  std::cout << "oracle: all checks passed\n";
  return 0;
}

// ---------- compare ----------

struct CompareArgs {
  std::string corpus_dir;
  std::vector<std::string> variants;
  std::string report_path;
  std::string config_path;
  mdd::TrainConfig base_config;
  CLI::App* cmd = nullptr;
};

int run_compare(CompareArgs& args) {
  if (args.variants.size() < 2) {
    throw mdd::InvalidArgument("compare: need at least two variants");
  }
  TrainArgs train_args;
  train_args.config_path = args.config_path;
  train_args.config = args.base_config;
  train_args.cmd = args.cmd;
  const mdd::TrainConfig base = resolve_train_config(train_args);

  const mdd::SynthCorpus corpus = mdd::read_corpus_dir(args.corpus_dir);

  json rows = json::array();
  std::vector<std::vector<std::string>> table{
      {"model", "final-loss", "dev-per", "test-per", "precision", "recall", "f1"}};
  std::vector<std::pair<std::string, mdd::RunReport>> reports;
  for (const std::string& label : args.variants) {
    mdd::TrainConfig cfg = base;
    cfg.variant_label = label;
    cfg.validate();
    std::cerr << "training " << label << "...\n";
    mdd::TrainOutput out = mdd::train_model(corpus, cfg, &std::cerr);
    json row = mdd::run_report_to_json(out.report);
    row["name"] = label;
    rows.push_back(std::move(row));
    table.push_back({label,
                     out.report.train_loss.empty() ? "-"
                                                   : format_double(out.report.train_loss.back(), 4),
                     out.report.dev_per.empty() ? "-" : format_double(out.report.dev_per.back(), 4),
                     format_double(out.report.test.per, 4),
                     format_pct(out.report.test.rates.precision) + "%",
                     format_pct(out.report.test.rates.recall) + "%",
                     format_pct(out.report.test.rates.f1) + "%"});
    reports.emplace_back(label, std::move(out.report));
  }

  // Contrast-vs-plain twins: record whether the contrastive run lowered the
  // false-accept count on this corpus and seed.
  json directional = json::array();
  for (const auto& [label, report] : reports) {
    const std::string contrast_label = label + "Contrast";
    for (const auto& [other_label, other_report] : reports) {
      if (other_label != contrast_label) continue;
      directional.push_back(
          json{{"pair", label},
               {"false_accept_plain", report.test.counts.fa},
               {"false_accept_contrast", other_report.test.counts.fa},
               {"contrast_not_worse",
                other_report.test.counts.fa <= report.test.counts.fa}});
    }
  }

  json report{{"tool", {{"name", mdd::kToolName}, {"version", mdd::kVersion}}},
              {"corpus", args.corpus_dir},
              {"seed", base.seed},
              {"rows", std::move(rows)},
              {"directional", std::move(directional)}};
  if (!args.report_path.empty()) write_report_file(report, args.report_path);

  print_table(table, std::cout);
  std::vector<std::vector<std::string>> counts_table{kMddHeader};
  for (const auto& [label, rep] : reports) {
    counts_table.push_back(mdd_counts_row(label, rep.test.counts));
  }
  print_table(counts_table, std::cout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"text-aware mispronunciation detection toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(mdd::kVersion));

  SynthArgs synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  synth.cmd = synth_cmd;
  synth_cmd->add_option("--out", synth.out_dir, "output directory")->required();
  synth_cmd->add_option("--config", synth.config_path, "corpus config JSON file");
  synth_cmd->add_option("--seed", synth.config.seed, "corpus seed");
  synth_cmd->add_option("--utterances", synth.config.utterance_count, "number of utterances");
  synth_cmd->add_option("--inventory", synth.config.inventory_size, "phone inventory size");
  synth_cmd->add_option("--min-len", synth.config.min_length, "min canonical length");
  synth_cmd->add_option("--max-len", synth.config.max_length, "max canonical length");
  synth_cmd->add_option("--p-sub", synth.config.p_substitution, "substitution rate");
  synth_cmd->add_option("--p-del", synth.config.p_deletion, "deletion rate");
  synth_cmd->add_option("--p-ins", synth.config.p_insertion, "insertion rate");
  synth_cmd->add_option("--min-frames", synth.config.min_frames_per_phone, "min frames per phone");
  synth_cmd->add_option("--max-frames", synth.config.max_frames_per_phone, "max frames per phone");
  synth_cmd->add_option("--feature-dim", synth.config.feature_dim, "acoustic feature dimension");
  synth_cmd->add_option("--noise-sigma", synth.config.noise_sigma, "frame noise sigma");
  synth_cmd->add_option("--prototype-scheme", [&synth](const std::vector<std::string>& v) {
    synth.config.prototype_scheme = mdd::parse_prototype_scheme(v.at(0));
    return true;
  }, "prototype scheme: gaussian|sphere");

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train a recognizer");
  train.cmd = train_cmd;
  train_cmd->add_option("--corpus", train.corpus_dir, "corpus directory")->required();
  train_cmd->add_option("--out", train.checkpoint_path, "output checkpoint path")->required();
  train_cmd->add_option("--report", train.report_path, "write run report JSON here");
  train_cmd->add_option("--config", train.config_path, "train config JSON file");
  train_cmd->add_option("--seed", train.config.seed, "training seed");
  train_cmd->add_option("--variant", train.config.variant_label,
                        "fusion variant label (Baseline, BaselineAdd, DoubleGate, TextGate, "
                        "TextGateSigma, TextGatePhi, AudioGate; append Contrast)");
  train_cmd->add_flag("--scale-scores", train.config.scale_scores,
                      "scale fusion attention scores by 1/sqrt(d)");
  train_cmd->add_option("--contrast-margin", train.config.contrast_margin, "hinge margin m");
  train_cmd->add_option("--lr", train.config.learning_rate, "learning rate");
  train_cmd->add_option("--batch-size", train.config.batch_size, "batch size");
  train_cmd->add_option("--epochs", train.config.epochs, "training epochs");
  train_cmd->add_option("--freeze-steps", train.config.freeze_encoder_steps,
                        "freeze the audio encoder for the first N optimizer steps");
  train_cmd->add_option("--model-dim", train.config.model_dim, "model width d");
  train_cmd->add_option("--n-max", train.config.n_max, "max canonical length for positions");
  train_cmd->add_flag("--deterministic,!--no-deterministic", train.config.deterministic,
                      "single-threaded deterministic execution (always on; recorded)");
  train_cmd->add_flag("--abort-on-infeasible", train.config.abort_on_infeasible,
                      "abort instead of skipping CTC-infeasible utterances");

  EvalArgs eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a corpus split");
  eval_cmd->add_option("--checkpoint", eval.checkpoint_path, "checkpoint path")->required();
  eval_cmd->add_option("--corpus", eval.corpus_file, "corpus split file (.jsonl)")->required();
  eval_cmd->add_option("--report", eval.report_path, "write eval report JSON here");
  eval_cmd->add_option("--hypothesis", eval.hypothesis,
                       "hypothesis source: model|annotation|canonical");

  ScoreArgs score;
  CLI::App* score_cmd = app.add_subcommand("score", "score counts or phone-sequence triples");
  score_cmd->add_option("--counts", score.counts, "TA FR FA CD DE counts")->expected(5);
  score_cmd->add_option("--counts-file", score.counts_file, "JSON file with rows of counts");
  score_cmd->add_option("--triples", score.triples_file,
                        "JSONL file with canonical/annotation/hypothesis records");
  score_cmd->add_option("--report", score.report_path, "write score report JSON here");
  score_cmd->add_flag("--json", score.as_json, "print the report JSON to stdout");

  std::uint64_t oracle_seed = 1;
  CLI::App* oracle_cmd = app.add_subcommand("oracle", "run the numerical self-checks");
  oracle_cmd->add_option("--seed", oracle_seed, "oracle seed");

  CompareArgs compare;
  CLI::App* compare_cmd = app.add_subcommand("compare", "train and compare fusion variants");
  compare.cmd = compare_cmd;
  compare_cmd->add_option("--corpus", compare.corpus_dir, "corpus directory")->required();
  compare_cmd->add_option("--variants", compare.variants, "variant labels")
      ->required()
      ->delimiter(',');
  compare_cmd->add_option("--report", compare.report_path, "write comparison report JSON here");
  compare_cmd->add_option("--config", compare.config_path, "train config JSON file");
  compare_cmd->add_option("--seed", compare.base_config.seed, "training seed");
  compare_cmd->add_flag("--scale-scores", compare.base_config.scale_scores,
                        "scale fusion attention scores by 1/sqrt(d)");
  compare_cmd->add_option("--contrast-margin", compare.base_config.contrast_margin,
                          "hinge margin m");
  compare_cmd->add_option("--lr", compare.base_config.learning_rate, "learning rate");
  compare_cmd->add_option("--batch-size", compare.base_config.batch_size, "batch size");
  compare_cmd->add_option("--epochs", compare.base_config.epochs, "training epochs");
  compare_cmd->add_option("--freeze-steps", compare.base_config.freeze_encoder_steps,
                          "freeze the audio encoder for the first N optimizer steps");
  compare_cmd->add_option("--model-dim", compare.base_config.model_dim, "model width d");
  compare_cmd->add_option("--n-max", compare.base_config.n_max, "max canonical length");
  compare_cmd->add_flag("--deterministic,!--no-deterministic", compare.base_config.deterministic,
                        "single-threaded deterministic execution (always on; recorded)");
  compare_cmd->add_flag("--abort-on-infeasible", compare.base_config.abort_on_infeasible,
                        "abort instead of skipping CTC-infeasible utterances");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (synth_cmd->parsed()) return run_synth(synth);
    if (train_cmd->parsed()) return run_train(train);
    if (eval_cmd->parsed()) return run_eval(eval);
    if (score_cmd->parsed()) return run_score(score);
    if (oracle_cmd->parsed()) return run_oracle(oracle_seed);
    if (compare_cmd->parsed()) return run_compare(compare);
  } catch (const mdd::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return 3;
  } catch (const mdd::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
