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

#include "rhd/isolation_forest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "rhd/error.h"
#include "rhd/prng.h"
#include "rhd/stats.h"

namespace rhd::stats {
namespace {

constexpr double kEulerGamma = 0.5772156649015329;

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<std::vector<double>>& data, std::size_t dim,
              int max_depth, Prng& rng)
      : data_(data), dim_(dim), max_depth_(max_depth), rng_(rng) {}

  IsolationTree build(std::vector<std::size_t> rows) {
    IsolationTree tree;
    tree.nodes.reserve(2 * rows.size());
    grow(tree, rows, 0, rows.size(), 0);
    return tree;
  }

 private:
  std::int32_t grow(IsolationTree& tree, std::vector<std::size_t>& rows,
                    std::size_t begin, std::size_t end, int depth) {
    const auto id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[id].size = static_cast<std::int32_t>(end - begin);
    tree.nodes[id].depth = depth;
    if (end - begin <= 1 || depth >= max_depth_) return id;

    // Dimensions with a non-empty range among the rows of this node.
    std::vector<std::size_t> candidates;
    std::vector<double> lows(dim_), highs(dim_);
    for (std::size_t d = 0; d < dim_; ++d) {
      double lo = data_[rows[begin]][d];
      double hi = lo;
      for (std::size_t i = begin + 1; i < end; ++i) {
        const double v = data_[rows[i]][d];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      lows[d] = lo;
      highs[d] = hi;
      if (hi > lo) candidates.push_back(d);
    }
    if (candidates.empty()) return id;

    const std::size_t d = candidates[rng_.below(candidates.size())];
    double split = rng_.uniform(lows[d], highs[d]);
    if (split <= lows[d]) split = std::nextafter(lows[d], highs[d]);

    auto mid_it = std::partition(
        rows.begin() + static_cast<std::ptrdiff_t>(begin),
        rows.begin() + static_cast<std::ptrdiff_t>(end),
        [&](std::size_t r) { return data_[r][d] < split; });
    const auto mid = static_cast<std::size_t>(mid_it - rows.begin());

    tree.nodes[id].split_dim = static_cast<std::int32_t>(d);
    tree.nodes[id].split_value = split;
    const std::int32_t left = grow(tree, rows, begin, mid, depth + 1);
    const std::int32_t right = grow(tree, rows, mid, end, depth + 1);
    tree.nodes[id].left = left;
    tree.nodes[id].right = right;
    return id;
  }

  const std::vector<std::vector<double>>& data_;
  std::size_t dim_;
  int max_depth_;
  Prng& rng_;
};

double path_length(const IsolationTree& tree, std::span<const double> x) {
  std::int32_t id = 0;
  while (true) {
    const IsolationTree::Node& node = tree.nodes[static_cast<std::size_t>(id)];
    if (node.split_dim < 0) {
      return static_cast<double>(node.depth) +
             average_path_length(static_cast<std::size_t>(node.size));
    }
    id = x[static_cast<std::size_t>(node.split_dim)] < node.split_value ? node.left
                                                                        : node.right;
  }
}

}  // namespace

double average_path_length(std::size_t n) {
  if (n <= 1) return 0.0;
  if (n == 2) return 1.0;
  const double m = static_cast<double>(n - 1);
  const double harmonic = std::log(m) + kEulerGamma;
  return 2.0 * harmonic - 2.0 * m / static_cast<double>(n);
}

IsolationForestModel isolation_forest_fit(const std::vector<std::vector<double>>& vectors,
                                          const IsolationForestParams& params) {
  require(vectors.size() >= 2, ErrorCode::kInvalidInput,
          "isolation forest needs >= 2 vectors");
  require(params.n_trees >= 1, ErrorCode::kInvalidInput, "n_trees must be >= 1");
  require(params.contamination > 0.0 && params.contamination < 0.5,
          ErrorCode::kInvalidInput, "contamination must be in (0, 0.5)");
  const std::size_t dim = vectors.front().size();
  require(dim >= 1, ErrorCode::kInvalidInput, "vectors must have dimension >= 1");
  for (const auto& v : vectors) {
    require(v.size() == dim, ErrorCode::kInvalidInput,
            "isolation forest: dimension mismatch");
  }

  IsolationForestModel model;
  model.dim = dim;
  model.n_trees = params.n_trees;
  model.contamination = params.contamination;
  model.subsample_size = std::clamp<std::size_t>(params.subsample, 2, vectors.size());
  const int max_depth =
      static_cast<int>(std::ceil(std::log2(static_cast<double>(model.subsample_size))));

  Prng rng(params.seed);
  TreeBuilder builder(vectors, dim, max_depth, rng);
  std::vector<std::size_t> all(vectors.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  model.trees.reserve(params.n_trees);
  for (std::size_t t = 0; t < params.n_trees; ++t) {
    // Partial Fisher-Yates draws the subsample without replacement.
    for (std::size_t i = 0; i < model.subsample_size; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(all.size() - i));
      std::swap(all[i], all[j]);
    }
    std::vector<std::size_t> rows(all.begin(),
                                  all.begin() + static_cast<std::ptrdiff_t>(model.subsample_size));
    model.trees.push_back(builder.build(std::move(rows)));
  }

  std::vector<double> scores;
  scores.reserve(vectors.size());
  for (const auto& v : vectors) scores.push_back(isolation_forest_score(model, v));
  model.score_threshold = quantile(scores, 1.0 - params.contamination);
  return model;
}

double isolation_forest_score(const IsolationForestModel& model,
                              std::span<const double> vector) {
  require(vector.size() == model.dim, ErrorCode::kInvalidInput,
          "isolation forest: dimension mismatch (expected " +
              std::to_string(model.dim) + ")");
  double total = 0.0;
  for (const IsolationTree& tree : model.trees) total += path_length(tree, vector);
  const double mean_path = total / static_cast<double>(model.trees.size());
  return std::exp2(-mean_path / average_path_length(model.subsample_size));
}

}  // namespace rhd::stats
