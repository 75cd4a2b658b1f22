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
#include <initializer_list>
#include <vector>

#include "mdd/matrix.hpp"
#include "mdd/phone.hpp"

namespace mddtest {

// Lattice from linear per-frame probabilities; rows must already sum to one.
inline mdd::Matrix<double> prob_lattice(std::initializer_list<std::initializer_list<double>> rows) {
  const int r = static_cast<int>(rows.size());
  const int c = static_cast<int>(rows.begin()->size());
  mdd::Matrix<double> m(r, c);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (double p : row) m(i, j++) = std::log(p);
    ++i;
  }
  return m;
}

inline mdd::PhoneSeq seq(std::vector<int> ids, mdd::Role role = mdd::Role::kAnnotation) {
  return mdd::PhoneSeq(std::move(ids), role);
}

}  // namespace mddtest
