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
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "mdd/contrastive.hpp"
#include "mdd/ctc.hpp"
#include "mdd/encoders.hpp"
#include "mdd/fusion.hpp"
#include "mdd/metrics.hpp"
#include "mdd/rng.hpp"

// Independent oracles for the numerical core: exhaustive enumerations and
// central finite differences that never share code with the implementations
// they check. `mdd oracle` runs all of them; the acceptance suite reuses the
// individual entry points.

namespace mdd::selfcheck {

struct OracleReport {
  std::string name;
  long cases = 0;
  double max_err = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;
};

// |a-b| normalized by max(|a|, |b|, 1); tight for O(1)-scale quantities and
// absolute for tiny ones.
inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

// ---------- random instance helpers ----------

inline Matrix<double> random_logits(Rng& rng, int rows, int cols) {
  Matrix<double> m(rows, cols);
  for (double& v : m.data()) v = rng.normal();
  return m;
}

inline Matrix<double> random_lattice(Rng& rng, int frames, int alphabet) {
  return log_softmax_rows(random_logits(rng, frames, alphabet));
}

inline PhoneSeq random_phone_seq(Rng& rng, int length, int num_phones, Role role) {
  std::vector<int> ids(static_cast<std::size_t>(length));
  for (int& id : ids) id = rng.uniform_int(1, num_phones);
  return PhoneSeq(std::move(ids), role);
}

// Central finite differences of `loss()` with respect to every entry of `x`,
// compared against `analytic`.
template <class LossFn>
double fd_check_matrix(Matrix<double>& x, const Matrix<double>& analytic, LossFn&& loss,
                       double step) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x.data()[i];
    x.data()[i] = saved + step;
    const double up = loss();
    x.data()[i] = saved - step;
    const double down = loss();
    x.data()[i] = saved;
    const double fd = (up - down) / (2.0 * step);
    worst = std::max(worst, rel_err(fd, analytic.data()[i]));
  }
  return worst;
}

// ---------- CTC ----------

// Forward recursion against exhaustive path enumeration.
inline OracleReport check_ctc_equivalence(std::uint64_t seed, int instances) {
  OracleReport report{"ctc_forward_vs_enumeration", 0, 0.0, 1e-9, false, ""};
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const int frames = rng.uniform_int(1, 6);
    const int num_phones = rng.uniform_int(1, 3);
    const int length = rng.uniform_int(0, 3);
    const Matrix<double> lattice = random_lattice(rng, frames, num_phones + 1);
    const PhoneSeq seq = random_phone_seq(rng, length, num_phones, Role::kAnnotation);
    const double dp = ctc_log_prob(lattice, seq);
    const double brute = ctc_brute_force_log_prob(lattice, seq);
    ++report.cases;
    if (std::isinf(dp) && std::isinf(brute)) continue;
    report.max_err = std::max(report.max_err, std::abs(dp - brute));
  }
  report.pass = report.max_err <= report.tolerance;
  return report;
}

// CTC gradient in the unconstrained-logits parameterization against central
// finite differences.
inline OracleReport check_ctc_grad(std::uint64_t seed, int instances) {
  OracleReport report{"ctc_grad_vs_finite_differences", 0, 0.0, 1e-6, false, ""};
  Rng rng(seed);
  const double step = 1e-6;
  while (report.cases < instances) {
    const int frames = rng.uniform_int(2, 5);
    const int num_phones = rng.uniform_int(2, 3);
    const int length = rng.uniform_int(1, std::min(frames, 3));
    Matrix<double> logits = random_logits(rng, frames, num_phones + 1);
    const PhoneSeq seq = random_phone_seq(rng, length, num_phones, Role::kAnnotation);
    if (std::isinf(ctc_log_prob(log_softmax_rows(logits), seq))) continue;

    const CtcGradResult<double> res = ctc_loss_and_grad(log_softmax_rows(logits), seq);
    const Matrix<double> analytic =
        logit_grad_from_lattice_grad(log_softmax_rows(logits), res.lattice_grad);
    const double err = fd_check_matrix(
        logits, analytic,
        [&] { return ctc_loss_and_grad(log_softmax_rows(logits), seq).loss; }, step);
    report.max_err = std::max(report.max_err, err);
    ++report.cases;
  }
  report.pass = report.max_err <= report.tolerance;
  return report;
}

// ---------- alignment ----------

// Independent top-down memoized edit distance.
inline int edit_distance_reference(const std::vector<int>& a, const std::vector<int>& b) {
  const int m = static_cast<int>(a.size());
  const int n = static_cast<int>(b.size());
  std::vector<std::vector<int>> memo(static_cast<std::size_t>(m + 1),
                                     std::vector<int>(static_cast<std::size_t>(n + 1), -1));
  std::function<int(int, int)> rec = [&](int i, int j) -> int {
    if (i == 0) return j;
    if (j == 0) return i;
    int& cached = memo[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    if (cached >= 0) return cached;
    int best = rec(i - 1, j - 1) +
               (a[static_cast<std::size_t>(i - 1)] == b[static_cast<std::size_t>(j - 1)] ? 0 : 1);
    best = std::min(best, rec(i - 1, j) + 1);
    best = std::min(best, rec(i, j - 1) + 1);
    cached = best;
    return best;
  };
  return rec(m, n);
}

inline void enumerate_sequences(int num_phones, int max_len,
                                const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> seq;
  std::function<void(int)> rec = [&](int remaining) {
    visit(seq);
    if (remaining == 0) return;
    for (int s = 1; s <= num_phones; ++s) {
      seq.push_back(s);
      rec(remaining - 1);
      seq.pop_back();
    }
  };
  rec(max_len);
}

// Exhaustive cross-check of align_pair over every sequence pair up to
// max_len, plus alignment validity and traceback determinism.
inline OracleReport check_alignment(int num_phones, int max_len) {
  OracleReport report{"alignment_vs_reference_distance", 0, 0.0, 0.0, false, ""};
  std::vector<std::vector<int>> all;
  enumerate_sequences(num_phones, max_len, [&](const std::vector<int>& s) { all.push_back(s); });

  long mismatches = 0;
  for (const std::vector<int>& a : all) {
    for (const std::vector<int>& b : all) {
      const PhoneSeq sa(a, Role::kCanonical);
      const PhoneSeq sb(b, Role::kAnnotation);
      const PairAlignment alignment = align_pair(sa, sb);
      ++report.cases;

      if (alignment.distance != edit_distance_reference(a, b)) ++mismatches;

      // Column cost must equal the reported distance and rows must recover
      // the inputs.
      int cost = 0;
      std::vector<int> ra, rb;
      for (const PairAlignment::Column& col : alignment.columns) {
        if (col.a != kGap) ra.push_back(col.a);
        if (col.b != kGap) rb.push_back(col.b);
        if (col.a != col.b) ++cost;
      }
      if (cost != alignment.distance || ra != a || rb != b) ++mismatches;

      // Determinism of the traceback.
      const PairAlignment again = align_pair(sa, sb);
      if (again.columns.size() != alignment.columns.size()) {
        ++mismatches;
      } else {
        for (std::size_t k = 0; k < again.columns.size(); ++k) {
          if (again.columns[k].a != alignment.columns[k].a ||
              again.columns[k].b != alignment.columns[k].b) {
            ++mismatches;
            break;
          }
        }
      }
    }
  }
  report.max_err = static_cast<double>(mismatches);
  report.pass = mismatches == 0;
  return report;
}

// ---------- contrastive ----------

// Full-product log-probability difference against the single-frame form.
inline OracleReport check_paired_path_identity(std::uint64_t seed, int instances) {
  OracleReport report{"paired_path_dissimilarity_identity", 0, 0.0, 1e-12, false, ""};
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const int frames = rng.uniform_int(2, 6);
    const int num_phones = rng.uniform_int(2, 4);
    const Matrix<double> lattice = random_lattice(rng, frames, num_phones + 1);

    std::vector<int> annotation_path(static_cast<std::size_t>(frames));
    for (int& s : annotation_path) s = rng.uniform_int(0, num_phones);
    std::vector<int> canonical_path = annotation_path;
    const int frame = rng.uniform_int(0, frames - 1);
    int replacement = rng.uniform_int(0, num_phones - 1);
    if (replacement >= canonical_path[static_cast<std::size_t>(frame)]) ++replacement;
    canonical_path[static_cast<std::size_t>(frame)] = replacement;

    double full = 0.0;
    for (int t = 0; t < frames; ++t) {
      full += lattice(t, canonical_path[static_cast<std::size_t>(t)]) -
              lattice(t, annotation_path[static_cast<std::size_t>(t)]);
    }
    const double single = path_dissimilarity(lattice, canonical_path, annotation_path, frame);
    report.max_err = std::max(report.max_err, std::abs(full - single));
    ++report.cases;
  }
  report.pass = report.max_err <= report.tolerance;
  return report;
}

// Raw frame-path implementation of the summed pairwise hinge: enumerate all
// (V+1)^T labellings, keep those collapsing to the canonical sequence, pair
// each by relabelling the substituted run, and sum the hinges. Independent of
// the lattice-graph walk in summed_pair_hinge.
inline double summed_pair_hinge_reference(const Matrix<double>& lattice, const LabelPair& pair,
                                          const ContrastConfig& cfg) {
  const int frames = lattice.rows();
  const int alphabet = lattice.cols();
  int sub_pos = -1;
  for (int i = 0; i < pair.canonical.size(); ++i) {
    if (pair.canonical.ids[static_cast<std::size_t>(i)] !=
        pair.annotation.ids[static_cast<std::size_t>(i)]) {
      sub_pos = i;
    }
  }

  double total = 0.0;
  std::vector<int> path(static_cast<std::size_t>(frames), 0);
  for (;;) {
    if (collapse_frame_labels(path) == pair.canonical.ids) {
      std::vector<int> paired(path);
      if (sub_pos >= 0) {
        int run = -1;
        int prev = -2;
        for (int t = 0; t < frames; ++t) {
          const int s = path[static_cast<std::size_t>(t)];
          if (s != PhoneInventory::kBlankId && s != prev) ++run;
          if (s != PhoneInventory::kBlankId && run == sub_pos) {
            paired[static_cast<std::size_t>(t)] =
                pair.annotation.ids[static_cast<std::size_t>(sub_pos)];
          }
          prev = s;
        }
      }
      if (collapse_frame_labels(paired) == pair.annotation.ids) {
        double diff = 0.0;
        for (int t = 0; t < frames; ++t) {
          diff += lattice(t, path[static_cast<std::size_t>(t)]) -
                  lattice(t, paired[static_cast<std::size_t>(t)]);
        }
        total += std::max(diff + cfg.margin_m, 0.0);
      }
    }
    int pos = frames - 1;
    while (pos >= 0 && path[static_cast<std::size_t>(pos)] == alphabet - 1) {
      path[static_cast<std::size_t>(pos--)] = 0;
    }
    if (pos < 0) break;
    ++path[static_cast<std::size_t>(pos)];
  }
  return total;
}

inline OracleReport check_summed_hinge(std::uint64_t seed, int instances) {
  OracleReport report{"summed_pair_hinge_vs_enumeration", 0, 0.0, 1e-9, false, ""};
  Rng rng(seed);
  for (int i = 0; i < instances; ++i) {
    const int num_phones = rng.uniform_int(2, 3);
    const int length = rng.uniform_int(1, 2);
    const int frames = rng.uniform_int(length, 5);
    const Matrix<double> lattice = random_lattice(rng, frames, num_phones + 1);
    PhoneSeq canonical = random_phone_seq(rng, length, num_phones, Role::kCanonical);
    PhoneSeq annotation = canonical;
    annotation.role = Role::kAnnotation;
    if (rng.uniform() < 0.8) {
      const int pos = rng.uniform_int(0, length - 1);
      int replacement = rng.uniform_int(1, num_phones - 1);
      if (replacement >= annotation.ids[static_cast<std::size_t>(pos)]) ++replacement;
      annotation.ids[static_cast<std::size_t>(pos)] = replacement;
    }
    const LabelPair pair{canonical, annotation};
    const ContrastConfig cfg{static_cast<double>(rng.uniform_int(0, 16)), true};
    const double fast = summed_pair_hinge(lattice, pair, cfg);
    const double reference = summed_pair_hinge_reference(lattice, pair, cfg);
    report.max_err = std::max(report.max_err, rel_err(fast, reference));
    ++report.cases;
  }
  report.pass = report.max_err <= report.tolerance;
  return report;
}

// ---------- fusion and model gradients ----------

inline const GateKind kAllGateKinds[] = {GateKind::kBaselineConcat, GateKind::kBaselineAdd,
                                         GateKind::kDoubleGate, GateKind::kTextGate,
                                         GateKind::kAudioGate};

inline OracleReport check_fusion_grad(std::uint64_t seed, int instances_per_variant) {
  OracleReport report{"fusion_grad_vs_finite_differences", 0, 0.0, 1e-5, false, ""};
  const double step = 1e-6;
  const AttnActivation activations[] = {AttnActivation::kSigmoid, AttnActivation::kSoftmax,
                                        AttnActivation::kTanh};
  Rng rng(seed);
  for (GateKind kind : kAllGateKinds) {
    for (AttnActivation activation : activations) {
      for (int i = 0; i < instances_per_variant; ++i) {
        const int frames = rng.uniform_int(1, 4);
        const int n = rng.uniform_int(1, 3);
        const int d = rng.uniform_int(2, 5);
        GateVariant variant{kind, activation, i % 2 == 1};

        Matrix<double> audio = random_logits(rng, frames, d);
        Matrix<double> text = random_logits(rng, n, d);
        GateParams<double> params = GateParams<double>::zeros(d);
        for (Matrix<double>* m : {&params.w, &params.u, &params.b, &params.w2, &params.u2,
                                  &params.b2, &params.proj}) {
          for (double& v : m->data()) v = 0.5 * rng.normal();
        }
        const Matrix<double> upstream = random_logits(rng, frames, d);

        auto loss = [&] {
          const FusionResult<double> out = fuse(audio, text, params, variant);
          double acc = 0.0;
          for (std::size_t k = 0; k < out.fused.size(); ++k) {
            acc += upstream.data()[k] * out.fused.data()[k];
          }
          return acc;
        };
        const FusionResult<double> cache = fuse(audio, text, params, variant);
        const FusionGrads<double> grads = fuse_grad(audio, text, params, variant, cache, upstream);

        double err = fd_check_matrix(audio, grads.d_audio, loss, step);
        err = std::max(err, fd_check_matrix(text, grads.d_text, loss, step));
        err = std::max(err, fd_check_matrix(params.w, grads.d_params.w, loss, step));
        err = std::max(err, fd_check_matrix(params.u, grads.d_params.u, loss, step));
        err = std::max(err, fd_check_matrix(params.b, grads.d_params.b, loss, step));
        err = std::max(err, fd_check_matrix(params.w2, grads.d_params.w2, loss, step));
        err = std::max(err, fd_check_matrix(params.u2, grads.d_params.u2, loss, step));
        err = std::max(err, fd_check_matrix(params.b2, grads.d_params.b2, loss, step));
        err = std::max(err, fd_check_matrix(params.proj, grads.d_params.proj, loss, step));
        report.max_err = std::max(report.max_err, err);
        ++report.cases;
      }
    }
  }
  report.pass = report.max_err <= report.tolerance;
  return report;
}

struct ModelFdInstance {
  ModelParams<double> model;
  Matrix<double> frames;
  LabelPair pair;
  ContrastConfig contrast;
};

inline ModelFdInstance make_model_fd_instance(std::uint64_t seed, GateKind kind,
                                              bool contrast_enabled) {
  Rng rng(seed);
  ModelDims dims;
  dims.d_in = 3;
  dims.d = 4;
  dims.num_phones = 3;
  dims.audio_blocks = 2;
  dims.text_blocks = 2;
  dims.n_max = 4;

  ModelFdInstance inst;
  GateVariant variant{kind, AttnActivation::kSigmoid, false};
  if (kind == GateKind::kBaselineConcat || kind == GateKind::kBaselineAdd) {
    variant.activation = AttnActivation::kSoftmax;
  }
  inst.model = init_model_params<double>(seed, dims, variant);
  inst.frames = random_logits(rng, 5, dims.d_in);

  // Any length-3 target is feasible in 5 frames (3 labels plus at most two
  // separating blanks).
  std::vector<int> canonical(3);
  for (int& id : canonical) id = rng.uniform_int(1, dims.num_phones);
  std::vector<int> annotation = canonical;
  const int pos = 1;
  int repl = rng.uniform_int(1, dims.num_phones - 1);
  if (repl >= annotation[pos]) ++repl;
  annotation[pos] = repl;

  inst.pair.canonical = PhoneSeq(canonical, Role::kCanonical);
  inst.pair.annotation = PhoneSeq(annotation, Role::kAnnotation);
  inst.contrast = ContrastConfig{16.0, contrast_enabled};
  return inst;
}

// Whole-model gradient check: every parameter of every variant, contrast on
// and off, against central finite differences of the combined loss.
inline OracleReport check_model_grad(std::uint64_t seed, int seeds_per_config) {
  OracleReport report{"model_grad_vs_finite_differences", 0, 0.0, 1e-4, false, ""};
  const double step = 1e-5;
  for (GateKind kind : kAllGateKinds) {
    for (bool contrast_enabled : {false, true}) {
      for (int s = 0; s < seeds_per_config; ++s) {
        ModelFdInstance inst =
            make_model_fd_instance(seed + static_cast<std::uint64_t>(s) * 977 + 13, kind,
                                   contrast_enabled);
        auto loss = [&] {
          const ForwardResult<double> fwd = forward(inst.model, inst.frames, inst.pair.canonical);
          return combined_loss(fwd.lattice, inst.pair, inst.contrast).loss;
        };
        const ForwardResult<double> fwd = forward(inst.model, inst.frames, inst.pair.canonical);
        const CombinedLossResult<double> l = combined_loss(fwd.lattice, inst.pair, inst.contrast);
        ModelParams<double> analytic = backward(inst.model, fwd.trace, l.lattice_grad);

        double err = 0.0;
        auto p_refs = param_refs(inst.model);
        auto g_refs = param_refs(analytic);
        for (std::size_t i = 0; i < p_refs.size(); ++i) {
          err = std::max(err, fd_check_matrix(*p_refs[i].matrix, *g_refs[i].matrix, loss, step));
        }
        report.max_err = std::max(report.max_err, err);
        ++report.cases;
      }
    }
  }
  report.pass = report.max_err <= report.tolerance;
  return report;
}

// Gate ablations: clamped text gate reproduces the audio-only pipeline;
// TextGate clamped to one reproduces BaselineAdd.
inline OracleReport check_gate_passthrough(std::uint64_t seed) {
  OracleReport report{"gate_passthrough", 0, 0.0, 1e-9, false, ""};
  Rng rng(seed);
  ModelDims dims;
  dims.d_in = 5;
  dims.d = 8;
  dims.num_phones = 4;
  dims.n_max = 6;

  const Matrix<double> frames = random_logits(rng, 7, dims.d_in);
  const PhoneSeq canonical = random_phone_seq(rng, 4, dims.num_phones, Role::kCanonical);

  {
    ModelParams<double> model = init_model_params<double>(
        seed + 1, dims, GateVariant{GateKind::kTextGate, AttnActivation::kSigmoid, false});
    GateClamp clamp;
    clamp.text_gate = 0.0;
    const Matrix<double> gated = forward(model, frames, canonical, clamp).lattice;
    const Matrix<double> audio_only = forward_audio_only(model, frames);
    for (std::size_t i = 0; i < gated.size(); ++i) {
      report.max_err = std::max(report.max_err, std::abs(gated.data()[i] - audio_only.data()[i]));
    }
    ++report.cases;
  }
  {
    ModelParams<double> model = init_model_params<double>(
        seed + 2, dims, GateVariant{GateKind::kDoubleGate, AttnActivation::kSigmoid, false});
    GateClamp clamp;
    clamp.text_gate = 0.0;
    clamp.audio_gate = 1.0;
    const Matrix<double> gated = forward(model, frames, canonical, clamp).lattice;
    const Matrix<double> audio_only = forward_audio_only(model, frames);
    for (std::size_t i = 0; i < gated.size(); ++i) {
      report.max_err = std::max(report.max_err, std::abs(gated.data()[i] - audio_only.data()[i]));
    }
    ++report.cases;
  }
  {
    // Same parameters, same attention activation: BaselineAdd == TextGate@1.
    ModelParams<double> model = init_model_params<double>(
        seed + 3, dims, GateVariant{GateKind::kTextGate, AttnActivation::kSigmoid, false});
    GateClamp clamp;
    clamp.text_gate = 1.0;
    const Matrix<double> gated = forward(model, frames, canonical, clamp).lattice;
    model.variant.kind = GateKind::kBaselineAdd;
    const Matrix<double> added = forward(model, frames, canonical).lattice;
    for (std::size_t i = 0; i < gated.size(); ++i) {
      report.max_err = std::max(report.max_err, std::abs(gated.data()[i] - added.data()[i]));
    }
    ++report.cases;
  }
  report.pass = report.max_err <= report.tolerance;
  return report;
}

// ---------- driver ----------

inline std::vector<OracleReport> run_all_oracles(std::uint64_t seed) {
  return {
      check_ctc_equivalence(seed, 500),
      check_ctc_grad(seed + 1, 100),
      check_alignment(3, 5),
      check_paired_path_identity(seed + 2, 200),
      check_summed_hinge(seed + 3, 60),
      check_fusion_grad(seed + 4, 6),
      check_model_grad(seed + 5, 3),
      check_gate_passthrough(seed + 6),
  };
}

inline bool print_oracle_reports(const std::vector<OracleReport>& reports, std::ostream& out) {
  bool all_pass = true;
  for (const OracleReport& r : reports) {
    out << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " cases=" << r.cases
        << " max_err=" << r.max_err << " tol=" << r.tolerance;
    if (!r.note.empty()) out << " (" << r.note << ")";
    out << '\n';
    all_pass = all_pass && r.pass;
  }
  return all_pass;
}

}  // namespace mdd::selfcheck
