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

#include <set>
#include <stdexcept>

#include "doctest.h"
#include "fdcm/parallel.hpp"
#include "fdcm/rng.hpp"

using namespace fdcm;

TEST_CASE("derived seeds are stable and distinct across streams and indices") {
  CHECK(derive_seed(1, Stream::Tree, 0) == derive_seed(1, Stream::Tree, 0));
  std::set<std::uint64_t> seen;
  for (auto s : {Stream::Tree, Stream::Replication, Stream::Fold, Stream::Data}) {
    for (std::uint64_t i = 0; i < 100; ++i) seen.insert(derive_seed(42, s, i));
  }
  CHECK(seen.size() == 400);
  CHECK(derive_seed(1, Stream::Tree, 3) != derive_seed(2, Stream::Tree, 3));
  auto a = make_rng(5, Stream::Fold, 1);
  auto b = make_rng(5, Stream::Fold, 1);
  CHECK(a() == b());
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS_AS(parallel_for(10, 3,
                               [](std::size_t i) {
                                 if (i == 7) throw std::runtime_error("boom");
                               }),
                  std::runtime_error);
  parallel_for(0, 4, [](std::size_t) { FAIL("no work expected"); });
}
