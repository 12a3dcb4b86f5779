// Copyright (c) 2026 The Lectometer Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lectometer {

inline constexpr const char* kVersion = "0.1.0";

// Every failure the library reports derives from Error, so callers can catch
// one type at the boundary (the CLI does) and still dispatch on the subclass.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON syntax, missing or mistyped fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

enum class Pooling { kMax, kMean };

std::string_view to_string(Pooling pooling);
Pooling parse_pooling(std::string_view name);

/// Derives an independent sub-seed from a run-level seed, a procedure name and
/// a key (typically a dialect name, empty if unused).
///
/// The scheme is FNV-1a (64 bit) over `procedure`, a 0x1f separator and `key`,
/// xor-ed with `run_seed` and finalized with the splitmix64 mixer. It is fixed:
/// changing it changes every seeded result.
std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view procedure,
                          std::string_view key = {});

}  // namespace lectometer
