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

#include <stdexcept>
#include <string>

namespace mdd {

// Base class for every error thrown by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user input: out-of-range ids, bad configuration values, malformed
// argument combinations.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Shape disagreement between matrices, models and corpora.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A CTC training target that has probability zero under the given lattice
// (for example a label sequence longer than the frame count allows).
class InfeasibleTarget : public Error {
 public:
  using Error::Error;
};

// Malformed file content; the message names the offending record or field.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Non-finite values encountered where the run contract requires finite ones.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mdd
