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
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "mdd/matrix.hpp"
#include "mdd/phone.hpp"

// Log-space CTC over the blank-expanded label lattice: forward scoring,
// forward-backward gradients, a greedy decoder, and an exhaustive
// path-enumeration scorer for small instances.
//
// A lattice is a T x (V+1) matrix of log-probabilities, frames along rows,
// column 0 = blank, columns 1..V = phones. Every row must be a normalized
// distribution in log space.

namespace mdd {

// Labels with blanks inserted between, before and after each phone:
// [c,a,t] -> [-,c,-,a,-,t,-]. Length is always 2U+1.
struct ExpandedLabels {
  std::vector<int> symbols;

  int size() const { return static_cast<int>(symbols.size()); }
};

inline ExpandedLabels expand_with_blanks(const PhoneSeq& seq) {
  for (int id : seq.ids) {
    if (id == PhoneInventory::kBlankId) {
      throw InvalidArgument("expand_with_blanks: sequence contains blank id");
    }
  }
  ExpandedLabels out;
  out.symbols.reserve(2 * seq.ids.size() + 1);
  out.symbols.push_back(PhoneInventory::kBlankId);
  for (int id : seq.ids) {
    out.symbols.push_back(id);
    out.symbols.push_back(PhoneInventory::kBlankId);
  }
  return out;
}

inline std::vector<int> strip_blanks(const ExpandedLabels& expanded) {
  std::vector<int> out;
  for (int s : expanded.symbols) {
    if (s != PhoneInventory::kBlankId) out.push_back(s);
  }
  return out;
}

// Collapse a frame-level labelling: merge adjacent repeats, then drop blanks.
inline std::vector<int> collapse_frame_labels(const std::vector<int>& frames) {
  std::vector<int> out;
  int prev = -1;
  for (int s : frames) {
    if (s != prev && s != PhoneInventory::kBlankId) out.push_back(s);
    prev = s;
  }
  return out;
}

namespace detail {

template <class S>
void check_lattice(const Matrix<S>& lattice, const PhoneSeq& seq) {
  if (lattice.rows() < 1) throw InvalidArgument("lattice needs at least one frame");
  if (lattice.cols() < 2) throw InvalidArgument("lattice needs blank plus one phone");
  check_phone_ids(seq, lattice.cols() - 1, "ctc");
  if (!is_log_normalized(lattice, lattice_tolerance<S>())) {
    throw InvalidArgument("lattice rows are not normalized log-probabilities");
  }
}

// CTC forward pass over the expanded labels. alpha(t, u) is the log-mass of
// all prefixes that are at expanded position u after emitting frame t.
template <class S>
struct CtcForward {
  S log_prob = -std::numeric_limits<S>::infinity();
  Matrix<S> log_alpha;  // T x (2U+1)
  ExpandedLabels expanded;
};

template <class S>
CtcForward<S> ctc_forward(const Matrix<S>& lattice, const PhoneSeq& seq) {
  constexpr S kNegInf = -std::numeric_limits<S>::infinity();
  CtcForward<S> fwd;
  fwd.expanded = expand_with_blanks(seq);
  const int frames = lattice.rows();
  const int width = fwd.expanded.size();
  const std::vector<int>& sym = fwd.expanded.symbols;

  fwd.log_alpha = Matrix<S>(frames, width, kNegInf);
  Matrix<S>& alpha = fwd.log_alpha;

  alpha(0, 0) = lattice(0, sym[0]);
  if (width > 1) alpha(0, 1) = lattice(0, sym[1]);

  for (int t = 1; t < frames; ++t) {
    // Positions reachable at frame t that can still reach the end.
    const int lo = std::max(0, width - 2 * (frames - t));
    const int hi = std::min(width, 2 * t + 2);
    for (int u = lo; u < hi; ++u) {
      S acc = alpha(t - 1, u);
      if (u >= 1) acc = log_sum_exp(acc, alpha(t - 1, u - 1));
      if (u >= 2 && sym[u] != PhoneInventory::kBlankId && sym[u] != sym[u - 2]) {
        acc = log_sum_exp(acc, alpha(t - 1, u - 2));
      }
      alpha(t, u) = acc + lattice(t, sym[u]);
    }
  }

  fwd.log_prob = alpha(frames - 1, width - 1);
  if (width > 1) {
    fwd.log_prob = log_sum_exp(fwd.log_prob, alpha(frames - 1, width - 2));
  }
  return fwd;
}

}  // namespace detail

// ln P(seq | lattice): the log-mass of all frame paths that collapse to seq.
// Returns -inf when no valid path exists (e.g. the target is too long).
template <class S>
S ctc_log_prob(const Matrix<S>& lattice, const PhoneSeq& seq) {
  detail::check_lattice(lattice, seq);
  return detail::ctc_forward(lattice, seq).log_prob;
}

// Loss -ln P(seq|X) together with its gradient.
//
// label_posterior(t, k) is the posterior mass of symbol k at frame t summed
// over the expanded positions carrying k; lattice_grad = -label_posterior is
// the derivative of the loss in the log-probability coordinates. The
// derivative with respect to unconstrained (pre-softmax) logits is obtained
// with logit_grad_from_lattice_grad below.
template <class S>
struct CtcGradResult {
  S loss = S(0);
  Matrix<S> lattice_grad;      // d loss / d log y
  Matrix<S> label_posterior;   // gamma; rows sum to one
};

// Pull a lattice-coordinates gradient back through row-wise log-softmax:
// dz = g - softmax(lattice) * rowsum(g).
template <class S>
Matrix<S> logit_grad_from_lattice_grad(const Matrix<S>& lattice,
                                       const Matrix<S>& lattice_grad) {
  detail::check_same_shape(lattice, lattice_grad, "logit_grad_from_lattice_grad");
  Matrix<S> out(lattice.rows(), lattice.cols());
  for (int t = 0; t < lattice.rows(); ++t) {
    const S* g = lattice_grad.row(t);
    const S* lat = lattice.row(t);
    S row_sum = S(0);
    for (int k = 0; k < lattice.cols(); ++k) row_sum += g[k];
    S* dst = out.row(t);
    for (int k = 0; k < lattice.cols(); ++k) {
      dst[k] = g[k] - std::exp(lat[k]) * row_sum;
    }
  }
  return out;
}

template <class S>
CtcGradResult<S> ctc_loss_and_grad(const Matrix<S>& lattice, const PhoneSeq& seq) {
  constexpr S kNegInf = -std::numeric_limits<S>::infinity();
  detail::check_lattice(lattice, seq);
  const detail::CtcForward<S> fwd = detail::ctc_forward(lattice, seq);
  if (fwd.log_prob == kNegInf) {
    throw InfeasibleTarget("ctc_loss_and_grad: target sequence has probability zero (" +
                           std::to_string(seq.size()) + " labels, " +
                           std::to_string(lattice.rows()) + " frames)");
  }

  const int frames = lattice.rows();
  const int width = fwd.expanded.size();
  const std::vector<int>& sym = fwd.expanded.symbols;

  // beta(t, u): log-mass of completions that leave (t, u), excluding the
  // emission at frame t itself, so alpha + beta is the through-state mass.
  Matrix<S> beta(frames, width, kNegInf);
  beta(frames - 1, width - 1) = S(0);
  if (width > 1) beta(frames - 1, width - 2) = S(0);
  for (int t = frames - 2; t >= 0; --t) {
    const int lo = std::max(0, width - 2 * (frames - t));
    const int hi = std::min(width, 2 * t + 2);
    for (int u = lo; u < hi; ++u) {
      S acc = beta(t + 1, u) + lattice(t + 1, sym[u]);
      if (u + 1 < width) {
        acc = log_sum_exp(acc, beta(t + 1, u + 1) + lattice(t + 1, sym[u + 1]));
      }
      if (u + 2 < width && sym[u + 2] != PhoneInventory::kBlankId &&
          sym[u + 2] != sym[u]) {
        acc = log_sum_exp(acc, beta(t + 1, u + 2) + lattice(t + 1, sym[u + 2]));
      }
      beta(t, u) = acc;
    }
  }

  CtcGradResult<S> result;
  result.loss = -fwd.log_prob;
  result.label_posterior = Matrix<S>(frames, lattice.cols(), S(0));
  result.lattice_grad = Matrix<S>(frames, lattice.cols(), S(0));
  for (int t = 0; t < frames; ++t) {
    for (int u = 0; u < width; ++u) {
      const S mass = fwd.log_alpha(t, u) + beta(t, u) - fwd.log_prob;
      if (mass == kNegInf) continue;
      result.label_posterior(t, sym[u]) += std::exp(mass);
    }
    for (int k = 0; k < lattice.cols(); ++k) {
      result.lattice_grad(t, k) = -result.label_posterior(t, k);
    }
  }
  return result;
}

// Exhaustive reference scorer: enumerates every (V+1)^T frame path, collapses
// it, and sums the probability of those that collapse to seq. Only usable on
// tiny instances; this is the oracle the forward recursion is checked against.
template <class S>
S ctc_brute_force_log_prob(const Matrix<S>& lattice, const PhoneSeq& seq) {
  constexpr S kNegInf = -std::numeric_limits<S>::infinity();
  detail::check_lattice(lattice, seq);
  const int frames = lattice.rows();
  const int alphabet = lattice.cols();
  if (frames > 10 || alphabet - 1 > 5) {
    throw InvalidArgument("ctc_brute_force_log_prob: instance too large (T <= 10, V <= 5)");
  }

  std::vector<int> path(static_cast<std::size_t>(frames), 0);
  S total = kNegInf;
  for (;;) {
    S log_p = S(0);
    for (int t = 0; t < frames; ++t) log_p += lattice(t, path[t]);
    if (collapse_frame_labels(path) == seq.ids) total = log_sum_exp(total, log_p);

    int pos = frames - 1;
    while (pos >= 0 && path[pos] == alphabet - 1) path[pos--] = 0;
    if (pos < 0) break;
    ++path[pos];
  }
  return total;
}

// Per-frame argmax (ties to the lowest index, so blank wins ties), then
// collapse repeats and strip blanks.
template <class S>
PhoneSeq greedy_decode(const Matrix<S>& lattice) {
  if (lattice.rows() < 1 || lattice.cols() < 2) {
    throw InvalidArgument("greedy_decode: lattice too small");
  }
  std::vector<int> frames(static_cast<std::size_t>(lattice.rows()), 0);
  for (int t = 0; t < lattice.rows(); ++t) {
    const S* row = lattice.row(t);
    int best = 0;
    for (int k = 1; k < lattice.cols(); ++k) {
      if (row[k] > row[best]) best = k;
    }
    frames[static_cast<std::size_t>(t)] = best;
  }
  return PhoneSeq(collapse_frame_labels(frames), Role::kHypothesis);
}

}  // namespace mdd
