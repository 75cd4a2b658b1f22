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

#include <cmath>
#include <cstdint>
#include <vector>

#include "mdd/error.hpp"
#include "mdd/phone.hpp"

// Hierarchical mispronunciation scoring.
//
// Each canonical position is classified by comparing three rows after
// alignment: the canonical prompt, the annotation of what was actually said,
// and the recognizer hypothesis.
//
//   canonical == annotation (correct pronunciation):
//       hypothesis == canonical  -> true accept (TA)
//       otherwise                -> false rejection (FR)
//   canonical != annotation (mispronunciation, including gaps):
//       hypothesis == canonical  -> false accept (FA)
//       hypothesis == annotation -> true rejection, correct diagnosis (CD)
//       otherwise                -> true rejection, diagnosis error (DE)
//
// A gap compares equal only to a gap. Columns where canonical and annotation
// are both gaps (pure recognizer insertions) carry no canonical position and
// are excluded from the tally, which keeps TA+FR and FA+TR fixed properties
// of the evaluation data, identical across models.

namespace mdd {

inline constexpr int kGap = -1;

// One aligned pair of sequences; entries are phone ids or kGap.
struct PairAlignment {
  struct Column {
    int a;
    int b;
  };
  std::vector<Column> columns;
  int distance = 0;
};

// Minimal-cost Levenshtein alignment with unit costs and a deterministic
// traceback: from the end, prefer match > substitution > deletion (gap in b)
// > insertion (gap in a).
inline PairAlignment align_pair(const PhoneSeq& a, const PhoneSeq& b) {
  const int m = a.size();
  const int n = b.size();
  std::vector<std::vector<int>> dist(static_cast<std::size_t>(m + 1),
                                     std::vector<int>(static_cast<std::size_t>(n + 1), 0));
  for (int i = 0; i <= m; ++i) dist[static_cast<std::size_t>(i)][0] = i;
  for (int j = 0; j <= n; ++j) dist[0][static_cast<std::size_t>(j)] = j;
  for (int i = 1; i <= m; ++i) {
    for (int j = 1; j <= n; ++j) {
      const int sub_cost =
          a.ids[static_cast<std::size_t>(i - 1)] == b.ids[static_cast<std::size_t>(j - 1)] ? 0 : 1;
      int best = dist[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] + sub_cost;
      best = std::min(best, dist[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)] + 1);
      best = std::min(best, dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j - 1)] + 1);
      dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = best;
    }
  }

  PairAlignment out;
  out.distance = dist[static_cast<std::size_t>(m)][static_cast<std::size_t>(n)];
  int i = m;
  int j = n;
  std::vector<PairAlignment::Column> rev;
  while (i > 0 || j > 0) {
    const int here = dist[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    const int ai = i > 0 ? a.ids[static_cast<std::size_t>(i - 1)] : kGap;
    const int bj = j > 0 ? b.ids[static_cast<std::size_t>(j - 1)] : kGap;
    if (i > 0 && j > 0 && ai == bj &&
        here == dist[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)]) {
      rev.push_back({ai, bj});
      --i;
      --j;
    } else if (i > 0 && j > 0 &&
               here == dist[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)] + 1) {
      rev.push_back({ai, bj});
      --i;
      --j;
    } else if (i > 0 &&
               here == dist[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)] + 1) {
      rev.push_back({ai, kGap});
      --i;
    } else {
      rev.push_back({kGap, bj});
      --j;
    }
  }
  out.columns.assign(rev.rbegin(), rev.rend());
  return out;
}

// Three aligned rows; entries are phone ids or kGap. No column is all gaps.
struct AlignedTriple {
  struct Column {
    int canonical;
    int annotation;
    int hypothesis;
  };
  std::vector<Column> columns;
};

// Three-way alignment anchored on the annotation: canonical<->annotation and
// annotation<->hypothesis are aligned pairwise, then merged column by column
// on the shared annotation symbols. At each annotation boundary a pending
// canonical deletion and a pending hypothesis insertion combine into one
// (canonical, gap, hypothesis) column, in order; leftovers become
// (canonical, gap, gap) or (gap, gap, hypothesis) columns.
inline AlignedTriple align_triple(const PhoneSeq& canonical, const PhoneSeq& annotation,
                                  const PhoneSeq& hypothesis) {
  const PairAlignment ca = align_pair(canonical, annotation);
  const PairAlignment ah = align_pair(annotation, hypothesis);

  AlignedTriple out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < ca.columns.size() || j < ah.columns.size()) {
    const bool canonical_del = i < ca.columns.size() && ca.columns[i].b == kGap;
    const bool hypothesis_ins = j < ah.columns.size() && ah.columns[j].a == kGap;
    if (canonical_del && hypothesis_ins) {
      out.columns.push_back({ca.columns[i].a, kGap, ah.columns[j].b});
      ++i;
      ++j;
    } else if (canonical_del) {
      out.columns.push_back({ca.columns[i].a, kGap, kGap});
      ++i;
    } else if (hypothesis_ins) {
      out.columns.push_back({kGap, kGap, ah.columns[j].b});
      ++j;
    } else {
      // Both sides anchored on the same annotation symbol.
      out.columns.push_back({ca.columns[i].a, ca.columns[i].b, ah.columns[j].b});
      ++i;
      ++j;
    }
  }
  return out;
}

struct MddCounts {
  std::int64_t ta = 0;
  std::int64_t fr = 0;
  std::int64_t fa = 0;
  std::int64_t tr_correct_diag = 0;
  std::int64_t tr_diag_error = 0;

  std::int64_t true_rejection() const { return tr_correct_diag + tr_diag_error; }
  std::int64_t canonical_correct() const { return ta + fr; }
  std::int64_t mispronounced() const { return fa + true_rejection(); }

  MddCounts& operator+=(const MddCounts& o) {
    ta += o.ta;
    fr += o.fr;
    fa += o.fa;
    tr_correct_diag += o.tr_correct_diag;
    tr_diag_error += o.tr_diag_error;
    return *this;
  }
};

inline MddCounts tally(const AlignedTriple& triple) {
  MddCounts counts;
  for (const AlignedTriple::Column& col : triple.columns) {
    if (col.canonical == kGap && col.annotation == kGap) continue;  // insertion-only column
    if (col.canonical == col.annotation) {
      if (col.hypothesis == col.canonical) {
        ++counts.ta;
      } else {
        ++counts.fr;
      }
    } else {
      if (col.hypothesis == col.canonical) {
        ++counts.fa;
      } else if (col.hypothesis == col.annotation) {
        ++counts.tr_correct_diag;
      } else {
        ++counts.tr_diag_error;
      }
    }
  }
  return counts;
}

struct MddRates {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double correct_diagnosis_rate = 0.0;
  double per = 0.0;       // filled by sequence-level evaluation, not by rates()
  bool degenerate = false;  // some denominator was zero
};

inline MddRates rates(const MddCounts& counts) {
  MddRates r;
  const double tr = static_cast<double>(counts.true_rejection());
  const double fa_tr = static_cast<double>(counts.fa) + tr;
  const double fr_tr = static_cast<double>(counts.fr) + tr;
  if (fa_tr > 0) {
    r.recall = tr / fa_tr;
  } else {
    r.degenerate = true;
  }
  if (fr_tr > 0) {
    r.precision = tr / fr_tr;
  } else {
    r.degenerate = true;
  }
  if (r.precision + r.recall > 0) {
    r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
  } else {
    r.degenerate = true;
  }
  if (tr > 0) {
    r.correct_diagnosis_rate = static_cast<double>(counts.tr_correct_diag) / tr;
  } else {
    r.degenerate = true;
  }
  return r;
}

// Per-row percentage columns: TA and FR as shares of the canonical-correct
// positions, FA/CD/DE as shares of the mispronounced side.
struct MddColumnShares {
  double ta = 0.0;
  double fr = 0.0;
  double fa = 0.0;
  double correct_diag = 0.0;
  double diag_error = 0.0;
  bool degenerate = false;
};

inline MddColumnShares column_shares(const MddCounts& counts) {
  MddColumnShares s;
  const double canon = static_cast<double>(counts.canonical_correct());
  const double mis = static_cast<double>(counts.mispronounced());
  const double tr = static_cast<double>(counts.true_rejection());
  if (canon > 0) {
    s.ta = static_cast<double>(counts.ta) / canon;
    s.fr = static_cast<double>(counts.fr) / canon;
  } else {
    s.degenerate = true;
  }
  if (mis > 0) {
    s.fa = static_cast<double>(counts.fa) / mis;
  } else {
    s.degenerate = true;
  }
  if (tr > 0) {
    s.correct_diag = static_cast<double>(counts.tr_correct_diag) / tr;
    s.diag_error = static_cast<double>(counts.tr_diag_error) / tr;
  } else {
    s.degenerate = true;
  }
  return s;
}

inline int levenshtein_distance(const PhoneSeq& a, const PhoneSeq& b) {
  return align_pair(a, b).distance;
}

struct PerResult {
  double value = 0.0;
  bool degenerate = false;
};

// Phone error rate: edit distance over the reference length.
inline PerResult phone_error_rate(const PhoneSeq& reference, const PhoneSeq& hypothesis) {
  PerResult out;
  if (reference.empty()) {
    out.degenerate = true;
    return out;
  }
  out.value = static_cast<double>(levenshtein_distance(reference, hypothesis)) /
              static_cast<double>(reference.size());
  return out;
}

// Fraction -> percentage with two decimals, rounding half away from zero.
inline double percent_2dp(double fraction) {
  return std::round(fraction * 10000.0) / 100.0;
}

}  // namespace mdd
