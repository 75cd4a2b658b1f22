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

// Release-gate integration suite. Each criterion prints one [PASS]/[FAIL]
// line; the binary exits non-zero if any criterion fails. Needs the path to
// the CLI binary: acceptance_tests --cli <path-to-mdd>.

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mdd/contrastive.hpp"
#include "mdd/corpus.hpp"
#include "mdd/encoders.hpp"
#include "mdd/metrics.hpp"
#include "mdd/selfcheck.hpp"
#include "mdd/train.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::string g_cli;
fs::path g_work;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const std::string command = g_cli + " " + args;
  CliResult result;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) {
    result.output = "popen failed";
    return result;
  }
  char buffer[4096];
  while (std::fgets(buffer, sizeof(buffer), pipe) != nullptr) result.output += buffer;
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Row {
  const char* name;
  long long ta, fr, fa, cd, de;
  double ta_pct, fr_pct, fa_pct, cd_pct, de_pct, f1_pct;
};

// Published scoreboard rows: counts and the percentage columns they imply.
const Row kScoreboard[] = {
    {"BaselineRef", 23825, 1889, 1883, 1805, 603, 92.65, 7.35, 43.88, 74.96, 25.04, 56.08},
    {"Baseline", 24172, 1574, 1826, 1667, 766, 93.89, 6.11, 42.87, 68.52, 31.48, 58.87},
    {"BaselineAdd", 24239, 1507, 1932, 1471, 856, 94.15, 5.85, 45.36, 63.21, 36.79, 57.51},
    {"DoubleGate", 24352, 1394, 1874, 1638, 747, 94.59, 5.41, 44.00, 68.68, 31.32, 59.34},
    {"TextGate", 24330, 1416, 1811, 1671, 777, 94.50, 5.50, 42.52, 68.26, 31.74, 60.27},
    {"TextGateSigma", 24277, 1469, 1784, 1729, 746, 94.29, 5.71, 41.89, 69.86, 30.14, 60.34},
    {"TextGatePhi", 24337, 1409, 1973, 1468, 818, 94.53, 5.47, 46.33, 64.22, 35.78, 57.48},
    {"AudioGate", 24477, 1269, 2030, 1418, 811, 95.07, 4.93, 47.66, 63.62, 36.38, 57.47},
    {"TextGateXLSR", 24442, 1304, 1862, 1649, 748, 94.94, 5.06, 43.72, 68.79, 31.21, 60.23},
    {"TextGateContrast", 24130, 1616, 1722, 1770, 767, 93.72, 6.28, 40.43, 69.77, 30.23, 60.32},
    {"TextGateXLSRContrast", 24152, 1594, 1645, 1858, 756, 93.81, 6.19, 38.62, 71.08, 28.92,
     61.75},
};

// ---------- criteria ----------

bool criterion_score_rows(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  for (const Row& row : kScoreboard) {
    std::ostringstream args;
    args << "score --json --counts " << row.ta << " " << row.fr << " " << row.fa << " " << row.cd
         << " " << row.de;
    const CliResult res = run_cli(args.str());
    if (res.exit_code != 0) {
      detail = std::string("score exited with ") + std::to_string(res.exit_code);
      return false;
    }
    const json j = json::parse(res.output);
    const double f1 = 100.0 * j.at("rates").at("f1").get<double>();
    const double cd_pct = 100.0 * j.at("rates").at("correct_diagnosis_rate").get<double>();
    const double ta_pct = 100.0 * j.at("column_shares").at("true_accept").get<double>();
    const double fr_pct = 100.0 * j.at("column_shares").at("false_rejection").get<double>();
    const double fa_pct = 100.0 * j.at("column_shares").at("false_accept").get<double>();
    const double de_pct = 100.0 * j.at("column_shares").at("diag_error").get<double>();
    for (const auto& [got, want] :
         std::vector<std::pair<double, double>>{{f1, row.f1_pct},
                                                {ta_pct, row.ta_pct},
                                                {fr_pct, row.fr_pct},
                                                {fa_pct, row.fa_pct},
                                                {cd_pct, row.cd_pct},
                                                {de_pct, row.de_pct}}) {
      worst = std::max(worst, std::abs(got - want));
      if (std::abs(got - want) > 0.02) {
        detail = std::string(row.name) + ": got " + std::to_string(got) + ", expected " +
                 std::to_string(want);
        return false;
      }
    }
  }
  const double elapsed = seconds_since(start);
  std::ostringstream ss;
  ss << "11 rows, max |pp delta|=" << worst << ", " << elapsed << " s";
  detail = ss.str();
  return elapsed < 1.0;
}

bool criterion_ctc_equivalence(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const auto report = mdd::selfcheck::check_ctc_equivalence(2026, 1000);
  const double elapsed = seconds_since(start);
  std::ostringstream ss;
  ss << report.cases << " instances, max_err=" << report.max_err << ", " << elapsed << " s";
  detail = ss.str();
  return report.pass && elapsed < 60.0;
}

bool criterion_gradient_fidelity(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const auto report = mdd::selfcheck::check_model_grad(2027, 20);
  const double elapsed = seconds_since(start);
  std::ostringstream ss;
  ss << report.cases << " configs (5 variants x contrast on/off x 20 seeds), max_rel_err="
     << report.max_err << ", " << elapsed << " s";
  detail = ss.str();
  return report.pass && elapsed < 120.0;
}

bool criterion_contrastive_identities(std::string& detail) {
  mdd::Rng rng(2028);
  // loss == m exactly and zero gradient on identical pairs.
  for (int trial = 0; trial < 20; ++trial) {
    const mdd::Matrix<double> lattice = mdd::selfcheck::random_lattice(rng, 5, 4);
    const mdd::PhoneSeq target =
        mdd::selfcheck::random_phone_seq(rng, 2, 3, mdd::Role::kAnnotation);
    if (std::isinf(mdd::ctc_log_prob(lattice, target))) continue;
    const mdd::LabelPair pair{mdd::PhoneSeq(target.ids, mdd::Role::kCanonical), target};
    const auto res = mdd::contrastive_loss(lattice, pair, mdd::ContrastConfig{16.0, true});
    if (res.loss != 16.0 || mdd::max_abs(res.lattice_grad) != 0.0) {
      detail = "identical pair did not give loss == m with zero gradient";
      return false;
    }
  }
  // Inactive hinge: zero loss, zero gradient.
  {
    mdd::Matrix<double> lattice(1, 3);
    lattice(0, 1) = -2.0;
    lattice(0, 2) = -30.0;
    lattice(0, 0) = std::log(1.0 - std::exp(-2.0) - std::exp(-30.0));
    const mdd::LabelPair pair{mdd::PhoneSeq({2}, mdd::Role::kCanonical),
                              mdd::PhoneSeq({1}, mdd::Role::kAnnotation)};
    const auto res = mdd::contrastive_loss(lattice, pair, mdd::ContrastConfig{16.0, true});
    if (res.loss != 0.0 || mdd::max_abs(res.lattice_grad) != 0.0) {
      detail = "inactive hinge leaked a loss or gradient";
      return false;
    }
  }
  const auto identity = mdd::selfcheck::check_paired_path_identity(2029, 200);
  if (!identity.pass) {
    detail = "paired-path identity max_err=" + std::to_string(identity.max_err);
    return false;
  }
  const auto hinge = mdd::selfcheck::check_summed_hinge(2030, 60);
  if (!hinge.pass) {
    detail = "summed hinge vs enumeration max_err=" + std::to_string(hinge.max_err);
    return false;
  }
  std::ostringstream ss;
  ss << "identity max_err=" << identity.max_err << ", hinge max_err=" << hinge.max_err;
  detail = ss.str();
  return true;
}

bool criterion_gate_passthrough(std::string& detail) {
  mdd::Rng rng(2031);
  mdd::ModelDims dims;
  dims.d_in = 6;
  dims.d = 8;
  dims.num_phones = 5;
  dims.n_max = 8;
  const mdd::Matrix<double> frames = mdd::selfcheck::random_logits(rng, 9, dims.d_in);
  const mdd::PhoneSeq canonical =
      mdd::selfcheck::random_phone_seq(rng, 5, dims.num_phones, mdd::Role::kCanonical);

  double passthrough_err = 0.0;
  {
    const mdd::ModelParams<double> model = mdd::init_model_params<double>(
        81, dims, mdd::GateVariant{mdd::GateKind::kTextGate, mdd::AttnActivation::kSigmoid});
    mdd::GateClamp clamp;
    clamp.text_gate = 0.0;
    const auto gated = mdd::forward(model, frames, canonical, clamp).lattice;
    const auto audio_only = mdd::forward_audio_only(model, frames);
    for (std::size_t i = 0; i < gated.size(); ++i) {
      passthrough_err =
          std::max(passthrough_err, std::abs(gated.data()[i] - audio_only.data()[i]));
    }
  }
  double add_err = 0.0;
  {
    mdd::ModelParams<double> model = mdd::init_model_params<double>(
        82, dims, mdd::GateVariant{mdd::GateKind::kTextGate, mdd::AttnActivation::kSigmoid});
    mdd::GateClamp clamp;
    clamp.text_gate = 1.0;
    const auto gated = mdd::forward(model, frames, canonical, clamp).lattice;
    model.variant.kind = mdd::GateKind::kBaselineAdd;
    const auto added = mdd::forward(model, frames, canonical).lattice;
    for (std::size_t i = 0; i < gated.size(); ++i) {
      add_err = std::max(add_err, std::abs(gated.data()[i] - added.data()[i]));
    }
  }
  std::ostringstream ss;
  ss << "clamp0 vs audio-only max_err=" << passthrough_err
     << ", BaselineAdd vs TextGate@1 max_err=" << add_err;
  detail = ss.str();
  return passthrough_err <= 1e-9 && add_err <= 1e-12;
}

bool criterion_alignment(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const auto report = mdd::selfcheck::check_alignment(3, 6);
  std::ostringstream ss;
  ss << report.cases << " pairs, mismatches=" << report.max_err << ", "
     << seconds_since(start) << " s";
  detail = ss.str();
  return report.pass;
}

bool criterion_count_conservation(std::string& detail) {
  mdd::CorpusConfig cfg;
  cfg.seed = 5;
  cfg.utterance_count = 120;
  cfg.inventory_size = 6;
  cfg.feature_dim = 8;
  const mdd::SynthCorpus corpus = mdd::generate_corpus(cfg);

  mdd::ModelDims dims;
  dims.d_in = cfg.feature_dim;
  dims.d = 8;
  dims.num_phones = corpus.inventory.num_phones();
  dims.n_max = 16;

  std::vector<mdd::MddCounts> all_counts;
  for (std::uint64_t seed : {11ULL, 12ULL}) {
    const mdd::ModelParams<double> model = mdd::init_model_params<double>(
        seed, dims, mdd::GateVariant{mdd::GateKind::kTextGate, mdd::AttnActivation::kSigmoid});
    all_counts.push_back(
        mdd::evaluate_split(model, corpus.test, mdd::HypothesisSource::kModel).counts);
  }
  {
    const mdd::ModelParams<double> model = mdd::init_model_params<double>(
        13, dims, mdd::GateVariant{mdd::GateKind::kBaselineAdd, mdd::AttnActivation::kSoftmax});
    all_counts.push_back(
        mdd::evaluate_split(model, corpus.test, mdd::HypothesisSource::kAnnotation).counts);
    all_counts.push_back(
        mdd::evaluate_split(model, corpus.test, mdd::HypothesisSource::kCanonical).counts);
  }
  const auto canonical_total = all_counts.front().canonical_correct();
  const auto mis_total = all_counts.front().mispronounced();
  for (const mdd::MddCounts& counts : all_counts) {
    if (counts.canonical_correct() != canonical_total || counts.mispronounced() != mis_total) {
      detail = "totals differ across models";
      return false;
    }
  }
  std::ostringstream ss;
  ss << "TA+FR=" << canonical_total << ", FA+TR=" << mis_total << " constant across "
     << all_counts.size() << " model variants";
  detail = ss.str();
  return true;
}

bool criterion_end_to_end(std::string& detail) {
  const auto start = std::chrono::steady_clock::now();
  const fs::path corpus_dir = g_work / "corpus";
  {
    const CliResult synth = run_cli("synth --out " + corpus_dir.string() + " --seed 1");
    if (synth.exit_code != 0) {
      detail = "synth failed: " + synth.output;
      return false;
    }
  }
  const fs::path report_path = g_work / "compare.json";
  const CliResult compare =
      run_cli("compare --corpus " + corpus_dir.string() +
              " --variants Baseline,TextGate,TextGateContrast --seed 1 --report " +
              report_path.string() + " 2>" + (g_work / "compare.log").string());
  if (compare.exit_code != 0) {
    detail = "compare failed with exit " + std::to_string(compare.exit_code);
    return false;
  }
  const double elapsed = seconds_since(start);

  const json report = json::parse(read_file(report_path));
  if (report.at("rows").size() != 3) {
    detail = "expected 3 comparison rows";
    return false;
  }
  double textgate_dev_per = 1.0;
  for (const json& row : report.at("rows")) {
    // Every field populated.
    const json& test = row.at("test");
    if (row.at("dev_per").empty() || row.at("train_loss").empty() ||
        test.at("counts").at("canonical_total").get<long long>() <= 0) {
      detail = "comparison row has empty fields";
      return false;
    }
    if (row.at("name").get<std::string>() == "TextGate") {
      textgate_dev_per = row.at("dev_per").back().get<double>();
    }
  }
  if (!(textgate_dev_per < 0.15)) {
    detail = "TextGate dev PER " + std::to_string(textgate_dev_per) + " >= 0.15";
    return false;
  }
  bool directional_ok = false;
  for (const json& pair : report.at("directional")) {
    if (pair.at("pair").get<std::string>() == "TextGate") {
      directional_ok = pair.at("contrast_not_worse").get<bool>();
    }
  }
  if (!directional_ok) {
    detail = "contrast row FA exceeds its plain twin on the pinned seed";
    return false;
  }
  std::ostringstream ss;
  ss << "TextGate dev PER=" << textgate_dev_per << ", contrast FA not worse, " << elapsed
     << " s";
  detail = ss.str();
  return elapsed < 600.0;
}

bool criterion_determinism(std::string& detail) {
  const fs::path corpus_dir = g_work / "corpus";  // produced by criterion 8
  if (!fs::exists(corpus_dir / "manifest.json")) {
    const CliResult synth = run_cli("synth --out " + corpus_dir.string() + " --seed 1");
    if (synth.exit_code != 0) {
      detail = "synth failed";
      return false;
    }
  }
  const std::string train_flags =
      " --epochs 2 --model-dim 16 --seed 3 --variant TextGateContrast";
  std::array<std::string, 2> reports;
  std::array<std::string, 2> checkpoints;
  for (int run = 0; run < 2; ++run) {
    const fs::path ckpt = g_work / ("det_ckpt_" + std::to_string(run) + ".json");
    const fs::path report = g_work / ("det_report_" + std::to_string(run) + ".json");
    const CliResult res = run_cli("train --corpus " + corpus_dir.string() + " --out " +
                                  ckpt.string() + " --report " + report.string() + train_flags +
                                  " 2>/dev/null");
    if (res.exit_code != 0) {
      detail = "train failed with exit " + std::to_string(res.exit_code);
      return false;
    }
    reports[static_cast<std::size_t>(run)] = read_file(report);
    checkpoints[static_cast<std::size_t>(run)] = read_file(ckpt);
  }
  if (reports[0] != reports[1] || reports[0].empty()) {
    detail = "train reports differ between runs";
    return false;
  }
  if (checkpoints[0] != checkpoints[1]) {
    detail = "checkpoints differ between runs";
    return false;
  }

  std::array<std::string, 2> eval_reports;
  for (int run = 0; run < 2; ++run) {
    const fs::path report = g_work / ("det_eval_" + std::to_string(run) + ".json");
    const CliResult res =
        run_cli("eval --checkpoint " + (g_work / "det_ckpt_0.json").string() + " --corpus " +
                (corpus_dir / "test.jsonl").string() + " --report " + report.string());
    if (res.exit_code != 0) {
      detail = "eval failed with exit " + std::to_string(res.exit_code);
      return false;
    }
    eval_reports[static_cast<std::size_t>(run)] = read_file(report);
  }
  if (eval_reports[0] != eval_reports[1] || eval_reports[0].empty()) {
    detail = "eval reports differ between runs";
    return false;
  }
  detail = "train + eval reports and checkpoints byte-identical across runs";
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    if (flag == "--cli") g_cli = argv[i + 1];
    if (flag == "--workdir") g_work = argv[i + 1];
  }
  if (g_cli.empty()) {
    std::cerr << "usage: acceptance_tests --cli <path-to-mdd> [--workdir DIR]\n";
    return 2;
  }
  if (g_work.empty()) {
    g_work = fs::temp_directory_path() / "mdd_acceptance";
  }
  fs::create_directories(g_work);

  struct Criterion {
    const char* name;
    std::function<bool(std::string&)> run;
  };
  const std::vector<Criterion> criteria = {
      {"scoreboard rate reproduction (11 rows, +/-0.02pp, <1s)", criterion_score_rows},
      {"ctc forward equals exhaustive enumeration (1000 instances, 1e-9, <60s)",
       criterion_ctc_equivalence},
      {"whole-model gradient fidelity (5 variants x contrast x 20 seeds, 1e-4, <120s)",
       criterion_gradient_fidelity},
      {"contrastive-loss identities (margin, hinge, paired paths, summed hinge)",
       criterion_contrastive_identities},
      {"gate pass-through (clamp0 == audio-only @1e-9; BaselineAdd == TextGate@1 @1e-12)",
       criterion_gate_passthrough},
      {"alignment correctness (all pairs len<=6 over 3 phones, deterministic)",
       criterion_alignment},
      {"count conservation across model variants", criterion_count_conservation},
      {"end-to-end training and comparison (dev PER < 0.15, contrast FA not worse, <10min)",
       criterion_end_to_end},
      {"byte-identical deterministic reports", criterion_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::string detail;
    bool pass = false;
    try {
      pass = criteria[i].run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::cout << (pass ? "[PASS]" : "[FAIL]") << " criterion " << (i + 1) << ": "
              << criteria[i].name << " -- " << detail << std::endl;
    if (!pass) ++failures;
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all " << criteria.size() << " criteria passed" << std::endl;
  return 0;
}
