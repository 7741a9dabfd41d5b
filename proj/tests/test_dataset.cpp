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

#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "fdcm/dataset.hpp"

using namespace fdcm;
namespace fs = std::filesystem;

namespace {

fs::path write_temp(const std::string& name, const std::string& body) {
  const auto dir = fs::temp_directory_path() / "fdcm_test_dataset";
  fs::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << body;
  return path;
}

CsvLayout layout(std::vector<std::string> y, std::vector<std::string> u, std::size_t lag = 0) {
  CsvLayout l;
  l.response_columns = std::move(y);
  l.covariate_columns = std::move(u);
  l.lag = lag;
  return l;
}

}  // namespace

TEST_CASE("vec_outer small cases") {
  CHECK(vec_outer(std::vector<double>{1, 0}) == std::vector<double>{1, 0, 0, 0});
  CHECK(vec_outer(std::vector<double>{1, 2}) == std::vector<double>{1, 2, 2, 4});
  CHECK(vec_outer(std::vector<double>{0, 0, 0}) == std::vector<double>(9, 0.0));
}

TEST_CASE("vec_outer reshaped through VecIndex reproduces y y^T") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t p = 1 + trial % 7;
    std::vector<double> y(p);
    for (auto& v : y) v = g(rng);
    const auto vec = vec_outer(y);
    const VecIndex idx{p};
    for (std::size_t j = 1; j <= p; ++j) {
      for (std::size_t r = 1; r <= p; ++r) {
        const auto k = idx.k(j, r);
        CHECK(vec[k - 1] == y[j - 1] * y[r - 1]);
        CHECK(idx.entry(k) == std::pair{j, r});
      }
    }
  }
}

TEST_CASE("load_returns_csv shapes and lag pairing") {
  const auto path = write_temp("three.csv", "y1,y2,u1\n1,2,0.1\n3,4,0.2\n5,6,0.3\n");
  const auto d = load_returns_csv(path, layout({"y1", "y2"}, {"u1"}));
  CHECK(d.n() == 3);
  CHECK(d.p() == 2);
  CHECK(d.d() == 1);
  CHECK(d.y(2)[1] == 6.0);

  const auto lagged_path = write_temp("four.csv", "date,y,u\nd1,1,10\nd2,2,20\nd3,3,30\nd4,4,40\n");
  auto l = layout({"2"}, {"3"}, 1);
  l.date_column = "date";
  const auto lagged = load_returns_csv(lagged_path, l);
  REQUIRE(lagged.n() == 3);
  for (std::size_t t = 0; t < 3; ++t) {
    CHECK(lagged.u(t, 0) == 10.0 * static_cast<double>(t + 1));
    CHECK(lagged.y(t)[0] == static_cast<double>(t + 2));
  }
  CHECK(lagged.row_labels == std::vector<std::string>{"d2", "d3", "d4"});
}

TEST_CASE("load_returns_csv accepts ranges and comment lines") {
  const auto path = write_temp("range.csv", "# produced by hand\na,b,c,d\n1,2,3,4\n# mid-file note\n5,6,7,8\n");
  const auto d = load_returns_csv(path, layout({"1-3"}, {"d"}));
  CHECK(d.n() == 2);
  CHECK(d.p() == 3);
  CHECK(d.response_names == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("load_returns_csv reports the offending cell") {
  const auto path = write_temp("bad.csv", "y1,y2,u1\n1,2,3\n4,5,abc\n");
  try {
    load_returns_csv(path, layout({"y1", "y2"}, {"u1"}));
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == 3);
  }
  const auto missing = write_temp("missing.csv", "y1,u1\n1,\n");
  CHECK_THROWS_AS(load_returns_csv(missing, layout({"y1"}, {"u1"})), DataError);
  const auto ragged = write_temp("ragged.csv", "y1,u1\n1,2,3\n");
  CHECK_THROWS_AS(load_returns_csv(ragged, layout({"y1"}, {"u1"})), DataError);
  CHECK_THROWS_AS(load_returns_csv(path, layout({"nope"}, {"u1"})), DataError);
  CHECK_THROWS_AS(load_returns_csv(write_temp("nan.csv", "y1,u1\nnan,1\n"), layout({"y1"}, {"u1"})), DataError);
}

TEST_CASE("write then load round-trips bit-exactly") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  std::vector<double> y(40 * 3);
  std::vector<double> u(40 * 2);
  for (auto& v : y) v = g(rng) * 1e-7;
  for (auto& v : u) v = g(rng) * 1e9;
  const Dataset original(y, u, 3, 2);
  const auto path = fs::temp_directory_path() / "fdcm_test_dataset" / "round.csv";
  write_dataset_csv(path, original, std::vector<std::string>{"seed=9"});
  const auto back = load_returns_csv(path, layout({"1-3"}, {"4-5"}));
  CHECK(back.fingerprint() == original.fingerprint());
}

TEST_CASE("Dataset validates shapes and finiteness") {
  CHECK_THROWS(Dataset({1, 2, 3}, {1}, 2, 1));
  CHECK_THROWS(Dataset({std::nan("")}, {1}, 1, 1));
  CHECK_THROWS(Dataset({}, {}, 1, 1));
}

TEST_CASE("map_to_unit_cube") {
  const Dataset d({1, 2, 3}, {-1, 0, 2, 0, 0.5, 2, 1, 1, 2}, 1, 3);
  const auto mapped = map_to_unit_cube(d);
  CHECK(mapped.data.u(0, 0) == 0.0);
  CHECK(mapped.data.u(1, 0) == 0.5);
  CHECK(mapped.data.u(2, 0) == 1.0);
  // already spans [0, 1]: unchanged
  for (std::size_t i = 0; i < 3; ++i) CHECK(mapped.data.u(i, 1) == d.u(i, 1));
  for (std::size_t i = 0; i < 3; ++i) CHECK(mapped.data.u(i, 2) == 0.5);
  CHECK(mapped.map.any_constant());
  CHECK(mapped.map.constant[2]);

  const auto again = map_to_unit_cube(mapped.data);
  CHECK(again.data.fingerprint() == mapped.data.fingerprint());

}
