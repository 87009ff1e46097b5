/*
 * Copyright 2026 The rhd Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RHD_ISOLATION_FOREST_H_
#define RHD_ISOLATION_FOREST_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace rhd::stats {

struct IsolationTree {
  struct Node {
    // -1 marks a leaf.
    std::int32_t split_dim = -1;
    double split_value = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    // Number of subsample points that reached this node, and its depth.
    std::int32_t size = 0;
    std::int32_t depth = 0;
  };
  std::vector<Node> nodes;  // nodes[0] is the root
};

struct IsolationForestParams {
  std::size_t n_trees = 100;
  std::size_t subsample = 256;
  double contamination = 0.1;
  std::uint64_t seed = 0;
};

struct IsolationForestModel {
  std::vector<IsolationTree> trees;
  std::size_t dim = 0;
  std::size_t subsample_size = 0;
  std::size_t n_trees = 0;
  double contamination = 0.1;
  // (1 - contamination) type-7 quantile of the training scores.
  double score_threshold = 0.0;
};

// Average unsuccessful-search path length of a binary search tree with n
// keys, c(n) = 2 H(n-1) - 2 (n-1) / n with the usual isolation-forest
// approximation H(i) = ln(i) + Euler's constant; c(0) = c(1) = 0, c(2) = 1.
double average_path_length(std::size_t n);

// Subsample is clamped to the number of vectors. Split dimensions are drawn
// uniformly among those with non-zero range in the node; a node with no such
// dimension, a single point, or at the depth cap ceil(log2(subsample)) is a
// leaf.
IsolationForestModel isolation_forest_fit(const std::vector<std::vector<double>>& vectors,
                                          const IsolationForestParams& params);

// s(x) = 2^(-E[h(x)] / c(subsample)), in (0, 1]; higher is more anomalous.
double isolation_forest_score(const IsolationForestModel& model,
                              std::span<const double> vector);

}  // namespace rhd::stats

#endif  // RHD_ISOLATION_FOREST_H_
