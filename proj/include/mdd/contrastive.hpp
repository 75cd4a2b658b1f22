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
#include <cstdlib>
#include <limits>
#include <vector>

#include "mdd/ctc.hpp"
#include "mdd/matrix.hpp"
#include "mdd/phone.hpp"

// Margin-based contrastive objective over a CTC lattice. Given the canonical
// sequence (what the prompt said) and the annotation (what the speaker
// actually produced), the hinge
//
//     max( ln P(canonical|X) - ln P(annotation|X) + m, 0 )
//
// drives the canonical sequence's probability at least a margin m below the
// annotation's whenever the two differ, which is what pushes False Accepts
// down. The combined training objective adds this hinge to the CTC loss on
// the annotation.

namespace mdd {

struct ContrastConfig {
  double margin_m = 16.0;
  bool enabled = true;

  void validate() const {
    if (margin_m < 0.0) throw InvalidArgument("contrast margin must be >= 0");
  }
};

// Canonical/annotation pair for one utterance, both over the same inventory.
struct LabelPair {
  PhoneSeq canonical;
  PhoneSeq annotation;
};

// Dissimilarity of two frame-level paths that differ at exactly one frame:
// the full log-probability difference ln p(canonical path) - ln p(annotation
// path) collapses to the single differing frame's log-odds
// ln y_t(canonical symbol) - ln y_t(annotation symbol).
//
// `frame` must be the one position where the paths disagree.
template <class S>
S path_dissimilarity(const Matrix<S>& lattice, const std::vector<int>& canonical_path,
                     const std::vector<int>& annotation_path, int frame) {
  if (static_cast<int>(canonical_path.size()) != lattice.rows() ||
      static_cast<int>(annotation_path.size()) != lattice.rows()) {
    throw DimensionError("path_dissimilarity: paths must cover all frames");
  }
  int diff_count = 0;
  int diff_pos = -1;
  for (int t = 0; t < lattice.rows(); ++t) {
    const int c = canonical_path[static_cast<std::size_t>(t)];
    const int a = annotation_path[static_cast<std::size_t>(t)];
    if (c < 0 || c >= lattice.cols() || a < 0 || a >= lattice.cols()) {
      throw InvalidArgument("path_dissimilarity: symbol out of range");
    }
    if (c != a) {
      ++diff_count;
      diff_pos = t;
    }
  }
  if (diff_count != 1) {
    throw InvalidArgument("path_dissimilarity: paths must differ at exactly one frame, got " +
                          std::to_string(diff_count));
  }
  if (diff_pos != frame) {
    throw InvalidArgument("path_dissimilarity: paths differ at frame " +
                          std::to_string(diff_pos) + ", not " + std::to_string(frame));
  }
  return lattice(frame, canonical_path[static_cast<std::size_t>(frame)]) -
         lattice(frame, annotation_path[static_cast<std::size_t>(frame)]);
}

template <class S>
struct ContrastResult {
  S loss = S(0);
  Matrix<S> lattice_grad;  // d loss / d log y; zero when the hinge is inactive
  bool hinge_active = false;
};

// Sequence-level hinge: max(ln P(canonical) - ln P(annotation) + m, 0).
//
// The annotation must be representable (it is the training target); an
// unrepresentable canonical sequence simply leaves the hinge inactive. The
// subgradient at the kink is zero, so utterances pronounced exactly as
// prompted contribute the constant m and no gradient.
template <class S>
ContrastResult<S> contrastive_loss(const Matrix<S>& lattice, const LabelPair& pair,
                                   const ContrastConfig& cfg) {
  constexpr S kNegInf = -std::numeric_limits<S>::infinity();
  cfg.validate();
  const S margin = static_cast<S>(cfg.margin_m);

  ContrastResult<S> result;
  result.lattice_grad = Matrix<S>(lattice.rows(), lattice.cols(), S(0));

  if (pair.canonical == pair.annotation) {
    // Identical sequences: the log-probabilities cancel exactly and the
    // gradients cancel exactly; only the constant margin remains.
    if (ctc_log_prob(lattice, pair.annotation) == kNegInf) {
      throw InfeasibleTarget("contrastive_loss: annotation has probability zero");
    }
    result.loss = margin;
    result.hinge_active = false;
    return result;
  }

  const S log_p_annotation = ctc_log_prob(lattice, pair.annotation);
  if (log_p_annotation == kNegInf) {
    throw InfeasibleTarget("contrastive_loss: annotation has probability zero");
  }
  const S log_p_canonical = ctc_log_prob(lattice, pair.canonical);
  const S arg = log_p_canonical - log_p_annotation + margin;
  if (!(arg > S(0))) {
    return result;  // inactive hinge: zero loss, zero gradient
  }

  result.loss = arg;
  result.hinge_active = true;
  // d/d(log y) [ln P(canonical) - ln P(annotation)] = gamma_can - gamma_ann.
  const CtcGradResult<S> canonical_grad = ctc_loss_and_grad(lattice, pair.canonical);
  const CtcGradResult<S> annotation_grad = ctc_loss_and_grad(lattice, pair.annotation);
  for (std::size_t i = 0; i < result.lattice_grad.size(); ++i) {
    result.lattice_grad.data()[i] = canonical_grad.label_posterior.data()[i] -
                                    annotation_grad.label_posterior.data()[i];
  }
  return result;
}

template <class S>
struct CombinedLossResult {
  S loss = S(0);
  S ctc_loss = S(0);
  S contrast_loss = S(0);
  Matrix<S> lattice_grad;
};

// Total objective: CTC on the annotation plus, when enabled, the contrastive
// hinge. With the hinge disabled this is bit-for-bit the CTC term.
template <class S>
CombinedLossResult<S> combined_loss(const Matrix<S>& lattice, const LabelPair& pair,
                                    const ContrastConfig& cfg) {
  CombinedLossResult<S> result;
  CtcGradResult<S> ctc = ctc_loss_and_grad(lattice, pair.annotation);
  result.ctc_loss = ctc.loss;
  result.loss = ctc.loss;
  result.lattice_grad = std::move(ctc.lattice_grad);
  if (!cfg.enabled) return result;

  const ContrastResult<S> contrast = contrastive_loss(lattice, pair, cfg);
  result.contrast_loss = contrast.loss;
  result.loss += contrast.loss;
  if (contrast.hinge_active) {
    axpy(result.lattice_grad, S(1), contrast.lattice_grad);
  }
  return result;
}

// Oracle-scale evaluation of the summed pairwise hinge
//
//   sum over paired (canonical path, annotation path) of
//       max( ln p(canonical path) - ln p(annotation path) + m, 0 )
//
// for a pair differing by at most one substitution. Every valid path for the
// canonical expansion is paired with the path obtained by relabelling the
// frames spent on the substituted label; pairs whose relabelled path does not
// collapse to the annotation are infeasible and skipped. Enumeration only --
// training uses the sequence-level hinge above.
template <class S>
S summed_pair_hinge(const Matrix<S>& lattice, const LabelPair& pair,
                    const ContrastConfig& cfg) {
  cfg.validate();
  detail::check_lattice(lattice, pair.canonical);
  detail::check_lattice(lattice, pair.annotation);
  const int frames = lattice.rows();
  if (frames > 10 || lattice.cols() - 1 > 5) {
    throw InvalidArgument("summed_pair_hinge: instance too large (T <= 10, V <= 5)");
  }
  if (pair.canonical.size() != pair.annotation.size()) {
    throw InvalidArgument("summed_pair_hinge: pair is not a single substitution");
  }
  int diff_count = 0;
  for (int i = 0; i < pair.canonical.size(); ++i) {
    if (pair.canonical.ids[static_cast<std::size_t>(i)] !=
        pair.annotation.ids[static_cast<std::size_t>(i)]) {
      ++diff_count;
    }
  }
  if (diff_count > 1) {
    throw InvalidArgument("summed_pair_hinge: pair is not a single substitution");
  }

  const ExpandedLabels canonical_exp = expand_with_blanks(pair.canonical);
  const ExpandedLabels annotation_exp = expand_with_blanks(pair.annotation);
  const std::vector<int>& csym = canonical_exp.symbols;
  const std::vector<int>& asym = annotation_exp.symbols;
  const int width = canonical_exp.size();
  const S margin = static_cast<S>(cfg.margin_m);

  S total = S(0);
  std::vector<int> positions(static_cast<std::size_t>(frames), 0);

  // Depth-first enumeration of expanded-position paths for the canonical
  // labels.
  auto walk = [&](auto&& self, int t, int u, S log_p_canonical, S log_p_annotation) -> void {
    log_p_canonical += lattice(t, csym[static_cast<std::size_t>(u)]);
    log_p_annotation += lattice(t, asym[static_cast<std::size_t>(u)]);
    positions[static_cast<std::size_t>(t)] = u;
    if (t == frames - 1) {
      if (u != width - 1 && u != width - 2) return;
      if (diff_count == 1) {
        // The paired path must itself collapse to the annotation; adjacent
        // equal labels produced by the substitution can break that.
        std::vector<int> relabelled(static_cast<std::size_t>(frames));
        for (int k = 0; k < frames; ++k) {
          relabelled[static_cast<std::size_t>(k)] =
              asym[static_cast<std::size_t>(positions[static_cast<std::size_t>(k)])];
        }
        if (collapse_frame_labels(relabelled) != pair.annotation.ids) return;
      }
      total += std::max(log_p_canonical - log_p_annotation + margin, S(0));
      return;
    }
    self(self, t + 1, u, log_p_canonical, log_p_annotation);
    if (u + 1 < width) self(self, t + 1, u + 1, log_p_canonical, log_p_annotation);
    if (u + 2 < width && csym[static_cast<std::size_t>(u + 2)] != PhoneInventory::kBlankId &&
        csym[static_cast<std::size_t>(u + 2)] != csym[static_cast<std::size_t>(u)]) {
      self(self, t + 1, u + 2, log_p_canonical, log_p_annotation);
    }
  };

  walk(walk, 0, 0, S(0), S(0));
  if (width > 1) walk(walk, 0, 1, S(0), S(0));
  return total;
}

}  // namespace mdd
