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
#include <iosfwd>
#include <string>
#include <vector>

#include "fdcm/covariance.hpp"

namespace fdcm {

/// Header-less numeric CSV, one matrix row per line, preceded by `# ` comments.
void write_matrix_csv(std::ostream& out, const Matrix& m, const std::vector<std::string>& comment_lines = {});
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const std::vector<std::string>& comment_lines = {});

/// Inverse of write_matrix_csv; '#' lines are skipped. Throws DataError on bad cells.
Matrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace fdcm
