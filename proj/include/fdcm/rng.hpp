// Copyright 2026 The fdcm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <random>

namespace fdcm {

using Rng = std::mt19937_64;

/// Named substreams. Every random draw in the library descends from a single
/// root seed through derive_seed(parent, stream, index).
enum class Stream : std::uint64_t {
  Tree = 1,
  Replication = 2,
  Fold = 3,
  MeanForest = 4,
  SecondMomentForest = 5,
  Data = 6,
  TestPoints = 7,
  Backtest = 8,
};

/// splitmix64 finalizer applied to (parent, stream, index); stable across
/// platforms and compilers.
std::uint64_t derive_seed(std::uint64_t parent, Stream stream, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t parent, Stream stream, std::uint64_t index) {
  return Rng(derive_seed(parent, stream, index));
}

}  // namespace fdcm
