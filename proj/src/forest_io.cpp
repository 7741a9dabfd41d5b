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

#include "fdcm/forest_io.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace fdcm {

using nlohmann::json;

namespace {

json tree_to_json(const Tree& tree) {
  json nodes;
  std::vector<std::int32_t> feature;
  std::vector<double> threshold;
  std::vector<std::uint32_t> left, right, leaf_begin, leaf_end;
  std::vector<bool> oversized;
  for (const auto& nd : tree.nodes) {
    feature.push_back(nd.feature);
    threshold.push_back(nd.threshold);
    left.push_back(nd.left);
    right.push_back(nd.right);
    leaf_begin.push_back(nd.leaf_begin);
    leaf_end.push_back(nd.leaf_end);
    oversized.push_back(nd.oversized);
  }
  nodes["feature"] = feature;
  nodes["threshold"] = threshold;
  nodes["left"] = left;
  nodes["right"] = right;
  nodes["leaf_begin"] = leaf_begin;
  nodes["leaf_end"] = leaf_end;
  nodes["oversized"] = oversized;
  return json{{"j1", tree.j1}, {"j2", tree.j2}, {"leaf_samples", tree.leaf_samples}, {"nodes", nodes}};
}

Tree tree_from_json(const json& j) {
  Tree tree;
  tree.j1 = j.at("j1").get<std::vector<std::size_t>>();
  tree.j2 = j.at("j2").get<std::vector<std::size_t>>();
  tree.leaf_samples = j.at("leaf_samples").get<std::vector<std::size_t>>();
  const auto& nodes = j.at("nodes");
  const auto feature = nodes.at("feature").get<std::vector<std::int32_t>>();
  const auto threshold = nodes.at("threshold").get<std::vector<double>>();
  const auto left = nodes.at("left").get<std::vector<std::uint32_t>>();
  const auto right = nodes.at("right").get<std::vector<std::uint32_t>>();
  const auto leaf_begin = nodes.at("leaf_begin").get<std::vector<std::uint32_t>>();
  const auto leaf_end = nodes.at("leaf_end").get<std::vector<std::uint32_t>>();
  const auto oversized = nodes.at("oversized").get<std::vector<bool>>();
  const std::size_t count = feature.size();
  if (threshold.size() != count || left.size() != count || right.size() != count ||
      leaf_begin.size() != count || leaf_end.size() != count || oversized.size() != count) {
    throw std::runtime_error("forest file: node arrays have different lengths");
  }
  tree.nodes.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    auto& nd = tree.nodes[k];
    nd.feature = feature[k];
    nd.threshold = threshold[k];
    nd.left = left[k];
    nd.right = right[k];
    nd.leaf_begin = leaf_begin[k];
    nd.leaf_end = leaf_end[k];
    nd.oversized = oversized[k];
    if (nd.is_leaf() ? (nd.leaf_end < nd.leaf_begin || nd.leaf_end > tree.leaf_samples.size())
                     : (nd.left >= count || nd.right >= count)) {
      throw std::runtime_error("forest file: node " + std::to_string(k) + " references out of range");
    }
  }
  return tree;
}

}  // namespace

std::string forest_to_json(const Forest& forest) {
  const auto& c = forest.config();
  json j;
  j["format"] = "fdcm-forest";
  j["version"] = kForestFormatVersion;
  j["kind"] = forest.kind() == ResponseKind::Mean ? "mean" : "second_moment";
  j["n"] = forest.n();
  j["d"] = forest.d();
  j["dataset_fingerprint"] = forest.dataset_fingerprint();
  j["config"] = {{"num_trees", c.num_trees}, {"subsample_size", c.subsample_size}, {"min_leaf", c.min_leaf},
                 {"omega", c.omega},         {"random_split_prob", c.random_split_prob},
                 {"mtry", c.mtry},           {"seed", c.seed}};
  json trees = json::array();
  for (const auto& t : forest.trees()) trees.push_back(tree_to_json(t));
  j["trees"] = std::move(trees);
  return j.dump();
}

Forest forest_from_json(const std::string& text) {
  const json j = json::parse(text);
  if (j.value("format", "") != "fdcm-forest") throw std::runtime_error("not an fdcm forest file");
  if (j.at("version").get<int>() != kForestFormatVersion) {
    throw std::runtime_error("unsupported forest file version " + std::to_string(j.at("version").get<int>()));
  }
  const auto& jc = j.at("config");
  ForestConfig c;
  c.num_trees = jc.at("num_trees").get<std::size_t>();
  c.subsample_size = jc.at("subsample_size").get<std::size_t>();
  c.min_leaf = jc.at("min_leaf").get<std::size_t>();
  c.omega = jc.at("omega").get<double>();
  c.random_split_prob = jc.at("random_split_prob").get<double>();
  c.mtry = jc.at("mtry").get<std::size_t>();
  c.seed = jc.at("seed").get<std::uint64_t>();
  const auto kind_name = j.at("kind").get<std::string>();
  if (kind_name != "mean" && kind_name != "second_moment") {
    throw std::runtime_error("forest file: unknown kind '" + kind_name + "'");
  }
  std::vector<Tree> trees;
  for (const auto& jt : j.at("trees")) trees.push_back(tree_from_json(jt));
  if (trees.size() != c.num_trees) throw std::runtime_error("forest file: tree count disagrees with config");
  return Forest(c, kind_name == "mean" ? ResponseKind::Mean : ResponseKind::SecondMoment, std::move(trees),
                j.at("n").get<std::size_t>(), j.at("d").get<std::size_t>(),
                j.at("dataset_fingerprint").get<std::uint64_t>());
}

void save_forest(const Forest& forest, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << forest_to_json(forest) << '\n';
}

Forest load_forest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return forest_from_json(buffer.str());
}

}  // namespace fdcm
