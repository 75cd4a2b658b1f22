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

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "mdd/ctc.hpp"
#include "mdd/selfcheck.hpp"
#include "helpers.hpp"

using mdd::ctc_brute_force_log_prob;
using mdd::ctc_log_prob;
using mdd::ctc_loss_and_grad;
using mdd::expand_with_blanks;
using mdd::greedy_decode;
using mdd::Matrix;
using mdd::PhoneSeq;
using mddtest::prob_lattice;
using mddtest::seq;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("expand_with_blanks alternates blanks and labels") {
  const auto cat = expand_with_blanks(seq({3, 1, 20}));
  CHECK(cat.symbols == std::vector<int>{0, 3, 0, 1, 0, 20, 0});

  const auto empty = expand_with_blanks(seq({}));
  CHECK(empty.symbols == std::vector<int>{0});

  const auto repeated = expand_with_blanks(seq({1, 1}));
  CHECK(repeated.symbols == std::vector<int>{0, 1, 0, 1, 0});

  CHECK_THROWS_AS(expand_with_blanks(seq({1, 0, 2})), mdd::InvalidArgument);
}

TEST_CASE("expand_with_blanks length and round trip") {
  mdd::Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    const int len = rng.uniform_int(0, 8);
    const PhoneSeq s = mdd::selfcheck::random_phone_seq(rng, len, 5, mdd::Role::kCanonical);
    const auto expanded = expand_with_blanks(s);
    REQUIRE(expanded.size() == 2 * len + 1);
    for (int u = 0; u < expanded.size(); ++u) {
      if (u % 2 == 0) {
        CHECK(expanded.symbols[static_cast<std::size_t>(u)] == 0);
      } else {
        CHECK(expanded.symbols[static_cast<std::size_t>(u)] == s.ids[static_cast<std::size_t>(u / 2)]);
      }
    }
    CHECK(mdd::strip_blanks(expanded) == s.ids);
  }
}

TEST_CASE("ctc_log_prob single frame single path") {
  const auto lattice = prob_lattice({{0.4, 0.6}});
  CHECK(ctc_log_prob(lattice, seq({1})) == Catch::Approx(std::log(0.6)).epsilon(1e-12));
}

TEST_CASE("ctc_log_prob two uniform frames sums three paths") {
  const auto lattice = prob_lattice({{0.5, 0.5}, {0.5, 0.5}});
  CHECK(ctc_log_prob(lattice, seq({1})) == Catch::Approx(std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("ctc_log_prob infeasible repeated label") {
  const auto lattice = prob_lattice({{0.5, 0.5}, {0.5, 0.5}});
  CHECK(ctc_log_prob(lattice, seq({1, 1})) == -kInf);
  CHECK(ctc_brute_force_log_prob(lattice, seq({1, 1})) == -kInf);
}

TEST_CASE("ctc rejects invalid phone ids and unnormalized lattices") {
  const auto lattice = prob_lattice({{0.4, 0.6}});
  CHECK_THROWS_AS(ctc_log_prob(lattice, seq({2})), mdd::InvalidArgument);
  CHECK_THROWS_AS(ctc_log_prob(lattice, seq({0})), mdd::InvalidArgument);

  Matrix<double> bad(1, 2, std::log(0.7));
  CHECK_THROWS_AS(ctc_log_prob(bad, seq({1})), mdd::InvalidArgument);
}

TEST_CASE("forward recursion matches exhaustive enumeration") {
  const auto report = mdd::selfcheck::check_ctc_equivalence(11, 300);
  INFO(report.name << " max_err=" << report.max_err);
  CHECK(report.pass);
}

TEST_CASE("total probability over all label sequences is one") {
  // Every frame path collapses to exactly one sequence of length <= T.
  mdd::Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const int frames = rng.uniform_int(1, 4);
    const Matrix<double> lattice = mdd::selfcheck::random_lattice(rng, frames, 3);
    double total = 0.0;
    std::vector<std::vector<int>> all;
    mdd::selfcheck::enumerate_sequences(2, frames, [&](const std::vector<int>& s) {
      all.push_back(s);
    });
    for (const auto& ids : all) {
      const double lp = ctc_log_prob(lattice, seq(ids));
      if (lp != -kInf) total += std::exp(lp);
    }
    CHECK(total <= 1.0 + 1e-9);
    CHECK(total >= 1.0 - 1e-9);
  }
}

TEST_CASE("ctc_loss_and_grad single frame posterior") {
  const auto lattice = prob_lattice({{0.4, 0.6}});
  const auto res = ctc_loss_and_grad(lattice, seq({1}));
  CHECK(res.loss == Catch::Approx(-std::log(0.6)).epsilon(1e-12));
  // d loss / d log y: -1 on the label, 0 on blank.
  CHECK(res.lattice_grad(0, 1) == Catch::Approx(-1.0).margin(1e-12));
  CHECK(res.lattice_grad(0, 0) == Catch::Approx(0.0).margin(1e-12));
  // In the unconstrained-logits coordinates the softmax coupling appears.
  const auto logit = mdd::logit_grad_from_lattice_grad(lattice, res.lattice_grad);
  CHECK(logit(0, 1) == Catch::Approx(0.6 - 1.0).margin(1e-12));
  CHECK(logit(0, 0) == Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("ctc_loss_and_grad throws on zero-probability targets") {
  const auto lattice = prob_lattice({{0.5, 0.5}, {0.5, 0.5}});
  CHECK_THROWS_AS(ctc_loss_and_grad(lattice, seq({1, 1})), mdd::InfeasibleTarget);
}

TEST_CASE("ctc gradient matches finite differences") {
  const auto report = mdd::selfcheck::check_ctc_grad(19, 100);
  INFO(report.name << " max_err=" << report.max_err);
  CHECK(report.pass);
}

TEST_CASE("posterior rows sum to one on feasible targets") {
  mdd::Rng rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    const int frames = rng.uniform_int(2, 6);
    const Matrix<double> lattice = mdd::selfcheck::random_lattice(rng, frames, 4);
    const PhoneSeq target = mdd::selfcheck::random_phone_seq(rng, 2, 3, mdd::Role::kAnnotation);
    if (ctc_log_prob(lattice, target) == -kInf) continue;
    const auto res = ctc_loss_and_grad(lattice, target);
    for (int t = 0; t < frames; ++t) {
      double row = 0.0;
      for (int k = 0; k < lattice.cols(); ++k) row += res.label_posterior(t, k);
      CHECK(row == Catch::Approx(1.0).margin(1e-9));
    }
  }
}

TEST_CASE("greedy_decode collapses argmax frames") {
  // argmax per frame: blank, a, a, blank, b
  const auto lattice = prob_lattice({{0.8, 0.1, 0.1},
                                     {0.1, 0.8, 0.1},
                                     {0.2, 0.7, 0.1},
                                     {0.9, 0.05, 0.05},
                                     {0.1, 0.2, 0.7}});
  CHECK(greedy_decode(lattice).ids == std::vector<int>{1, 2});

  const auto blanks = prob_lattice({{0.8, 0.1, 0.1}, {0.6, 0.2, 0.2}});
  CHECK(greedy_decode(blanks).ids.empty());

  const auto separated = prob_lattice({{0.1, 0.8, 0.1}, {0.8, 0.1, 0.1}, {0.2, 0.7, 0.1}});
  CHECK(greedy_decode(separated).ids == std::vector<int>{1, 1});
}

TEST_CASE("greedy_decode ties break to the lowest index") {
  Matrix<double> lattice = prob_lattice({{0.5, 0.5}});
  // Equal mass on blank and phone 1: blank (index 0) wins.
  CHECK(greedy_decode(lattice).ids.empty());
}

TEST_CASE("greedy_decode output is collapsed and blank-free") {
  mdd::Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix<double> lattice =
        mdd::selfcheck::random_lattice(rng, rng.uniform_int(1, 10), rng.uniform_int(2, 5));
    const PhoneSeq decoded = greedy_decode(lattice);
    for (std::size_t i = 0; i < decoded.ids.size(); ++i) {
      CHECK(decoded.ids[i] >= 1);
      CHECK(decoded.ids[i] < lattice.cols());
    }
    // Independent re-derivation: argmax per frame (ties to the lowest index),
    // then merge runs and drop blanks.
    std::vector<int> reference;
    int prev = -1;
    for (int t = 0; t < lattice.rows(); ++t) {
      int best = 0;
      for (int k = 1; k < lattice.cols(); ++k) {
        if (lattice(t, k) > lattice(t, best)) best = k;
      }
      if (best != prev && best != 0) reference.push_back(best);
      prev = best;
    }
    CHECK(decoded.ids == reference);
  }
}

namespace {

// Deliberately broken forward recursion: allows the skip transition between
// equal labels. The enumeration oracle must catch it.
double broken_ctc_log_prob(const Matrix<double>& lattice, const PhoneSeq& target) {
  const auto expanded = expand_with_blanks(target);
  const int frames = lattice.rows();
  const int width = expanded.size();
  const std::vector<int>& sym = expanded.symbols;
  Matrix<double> alpha(frames, width, -kInf);
  alpha(0, 0) = lattice(0, sym[0]);
  if (width > 1) alpha(0, 1) = lattice(0, sym[1]);
  for (int t = 1; t < frames; ++t) {
    for (int u = 0; u < width; ++u) {
      double acc = alpha(t - 1, u);
      if (u >= 1) acc = mdd::log_sum_exp(acc, alpha(t - 1, u - 1));
      if (u >= 2 && sym[u] != 0) {  // missing the equal-label restriction
        acc = mdd::log_sum_exp(acc, alpha(t - 1, u - 2));
      }
      alpha(t, u) = acc + lattice(t, sym[u]);
    }
  }
  double lp = alpha(frames - 1, width - 1);
  if (width > 1) lp = mdd::log_sum_exp(lp, alpha(frames - 1, width - 2));
  return lp;
}

}  // namespace

TEST_CASE("enumeration oracle catches a broken transition rule") {
  // Repeated labels need a separating blank; dropping that rule overcounts.
  const auto lattice = prob_lattice(
      {{0.4, 0.3, 0.3}, {0.4, 0.3, 0.3}, {0.4, 0.3, 0.3}, {0.4, 0.3, 0.3}});
  const PhoneSeq target = seq({1, 1});
  const double reference = ctc_brute_force_log_prob(lattice, target);
  CHECK(std::abs(ctc_log_prob(lattice, target) - reference) <= 1e-9);
  CHECK(std::abs(broken_ctc_log_prob(lattice, target) - reference) > 1e-3);
}

TEST_CASE("ctc kernels instantiate in single precision") {
  Matrix<float> lattice(2, 2);
  lattice(0, 0) = std::log(0.5f);
  lattice(0, 1) = std::log(0.5f);
  lattice(1, 0) = std::log(0.5f);
  lattice(1, 1) = std::log(0.5f);
  const float lp = ctc_log_prob(lattice, seq({1}));
  CHECK(lp == Catch::Approx(std::log(0.75f)).epsilon(1e-5));
  const auto res = ctc_loss_and_grad(lattice, seq({1}));
  CHECK(res.loss == Catch::Approx(-std::log(0.75f)).epsilon(1e-5));
}

TEST_CASE("brute force guard rejects large instances") {
  mdd::Rng rng(5);
  const Matrix<double> lattice = mdd::selfcheck::random_lattice(rng, 11, 3);
  CHECK_THROWS_AS(ctc_brute_force_log_prob(lattice, seq({1})), mdd::InvalidArgument);
}
