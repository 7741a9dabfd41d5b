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

#include <filesystem>
#include <string>

#include "fdcm/honest_forest.hpp"

namespace fdcm {

inline constexpr int kForestFormatVersion = 1;

/// Versioned JSON layout: config, seed, dataset fingerprint and, per tree,
/// the J1/J2 index sets plus flat node arrays. Doubles are written with
/// round-trip precision, so load(save(f)) reproduces f exactly.
std::string forest_to_json(const Forest& forest);
Forest forest_from_json(const std::string& text);

void save_forest(const Forest& forest, const std::filesystem::path& path);
Forest load_forest(const std::filesystem::path& path);

}  // namespace fdcm
