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
#include <string>
#include <unordered_set>
#include <vector>

#include "mdd/error.hpp"

namespace mdd {

// Which of the three sequences-per-utterance a PhoneSeq represents. The math
// never depends on the role; it exists so call sites stay readable.
enum class Role { kCanonical, kAnnotation, kHypothesis };

inline const char* role_name(Role role) {
  switch (role) {
    case Role::kCanonical: return "canonical";
    case Role::kAnnotation: return "annotation";
    case Role::kHypothesis: return "hypothesis";
  }
  return "?";
}

// A sequence of phone ids over a fixed inventory. Ids are 1-based; id 0 is
// reserved for the CTC blank and never appears in a PhoneSeq.
struct PhoneSeq {
  std::vector<int> ids;
  Role role = Role::kHypothesis;

  PhoneSeq() = default;
  PhoneSeq(std::vector<int> phone_ids, Role r) : ids(std::move(phone_ids)), role(r) {}

  int size() const { return static_cast<int>(ids.size()); }
  bool empty() const { return ids.empty(); }
  bool operator==(const PhoneSeq& other) const { return ids == other.ids; }
};

// The label alphabet: V phone symbols plus the reserved blank at index 0.
// Phone symbol i (0-based in `phones`) carries id i + 1.
struct PhoneInventory {
  static constexpr int kBlankId = 0;

  std::vector<std::string> phones;

  int num_phones() const { return static_cast<int>(phones.size()); }
  int alphabet_size() const { return num_phones() + 1; }

  const std::string& symbol(int id) const {
    if (id < 1 || id > num_phones()) {
      throw InvalidArgument("phone id " + std::to_string(id) + " out of range");
    }
    return phones[static_cast<std::size_t>(id - 1)];
  }

  void validate() const {
    if (phones.empty()) throw InvalidArgument("inventory needs at least one phone");
    std::unordered_set<std::string> seen;
    for (const std::string& p : phones) {
      if (p == "-") throw InvalidArgument("blank symbol '-' may not be a phone");
      if (!seen.insert(p).second) {
        throw InvalidArgument("duplicate phone symbol '" + p + "'");
      }
    }
  }

  // Inventory with synthetic symbols p01..pNN.
  static PhoneInventory with_generic_symbols(int count) {
    if (count < 1) throw InvalidArgument("inventory needs at least one phone");
    PhoneInventory inv;
    inv.phones.reserve(static_cast<std::size_t>(count));
    for (int i = 1; i <= count; ++i) {
      char buf[16];
      std::snprintf(buf, sizeof(buf), "p%02d", i);
      inv.phones.emplace_back(buf);
    }
    return inv;
  }
};

inline void check_phone_ids(const PhoneSeq& seq, int num_phones, const char* what) {
  for (int id : seq.ids) {
    if (id == PhoneInventory::kBlankId) {
      throw InvalidArgument(std::string(what) + ": blank id is not a phone");
    }
    if (id < 1 || id > num_phones) {
      throw InvalidArgument(std::string(what) + ": phone id " + std::to_string(id) +
                            " out of range [1, " + std::to_string(num_phones) + "]");
    }
  }
}

}  // namespace mdd
