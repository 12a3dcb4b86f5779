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

#include "lectometer/common.hpp"

namespace lectometer {

std::string_view to_string(Pooling pooling) {
  return pooling == Pooling::kMax ? "max" : "mean";
}

Pooling parse_pooling(std::string_view name) {
  if (name == "max") return Pooling::kMax;
  if (name == "mean") return Pooling::kMean;
  throw ParseError("unknown pooling '" + std::string(name) +
                   "' (expected max or mean)");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void fnv1a(std::uint64_t& h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t run_seed, std::string_view procedure,
                          std::string_view key) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  fnv1a(h, procedure);
  fnv1a(h, "\x1f");
  fnv1a(h, key);
  return splitmix64(h ^ run_seed);
}

}  // namespace lectometer
