/*
 * Copyright 2026 The Effektor Authors.
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

#include "effektor/boosted_trees.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "effektor/error.hpp"
#include "effektor/random.hpp"

namespace effektor {
namespace {

using Node = BoostedTreesModel::Node;

// Candidate split thresholds of one feature and the bin index of every row.
// bin(x) = number of thresholds strictly below x, so x <= thresholds[s] iff
// bin(x) <= s.
struct FeatureBins {
  std::vector<double> thresholds;
  std::vector<std::uint16_t> bin;
};

FeatureBins BuildBins(const FeatureMatrix& x, int feature, int max_bins) {
  const auto n = static_cast<std::size_t>(x.rows());
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = x(static_cast<Eigen::Index>(i), feature);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> distinct;
  std::vector<std::size_t> first_rank;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0 || sorted[i] != sorted[i - 1]) {
      distinct.push_back(sorted[i]);
      first_rank.push_back(i);
    }
  }
  FeatureBins out;
  if (distinct.size() <= static_cast<std::size_t>(max_bins)) {
    for (std::size_t k = 0; k + 1 < distinct.size(); ++k) {
      out.thresholds.push_back(0.5 * (distinct[k] + distinct[k + 1]));
    }
  } else {
    // Equal-frequency cuts, snapped to midpoints between distinct values.
    std::size_t k = 0;
    for (int b = 1; b < max_bins; ++b) {
      const std::size_t target_rank = n * static_cast<std::size_t>(b) /
                                      static_cast<std::size_t>(max_bins);
      while (k + 1 < distinct.size() && first_rank[k + 1] <= target_rank) ++k;
      if (k + 1 >= distinct.size()) break;
      const double t = 0.5 * (distinct[k] + distinct[k + 1]);
      if (out.thresholds.empty() || t > out.thresholds.back()) {
        out.thresholds.push_back(t);
      }
    }
  }
  out.bin.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = x(static_cast<Eigen::Index>(i), feature);
    out.bin[i] = static_cast<std::uint16_t>(
        std::lower_bound(out.thresholds.begin(), out.thresholds.end(), v) -
        out.thresholds.begin());
  }
  return out;
}

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<FeatureBins>& bins, const BoostedTreesParams& params)
      : bins_(bins), params_(params) {
    std::size_t max_b = 0;
    for (const auto& fb : bins_) max_b = std::max(max_b, fb.thresholds.size() + 1);
    sums_.resize(max_b);
    counts_.resize(max_b);
  }

  // Grows one tree on `rows` (mutated in place) against `residual`.
  std::vector<Node> Build(std::vector<std::uint32_t>& rows,
                          const std::vector<double>& residual) {
    nodes_.clear();
    split_bin_.clear();
    Grow(rows.begin(), rows.end(), residual, 0);
    return nodes_;
  }

  // Routes a training row through the most recently built tree in bin space.
  double PredictTrainingRow(std::uint32_t row) const {
    int idx = 0;
    while (nodes_[static_cast<std::size_t>(idx)].feature >= 0) {
      const Node& node = nodes_[static_cast<std::size_t>(idx)];
      const auto b = bins_[static_cast<std::size_t>(node.feature)].bin[row];
      idx = b <= split_bin_[static_cast<std::size_t>(idx)] ? node.left : node.right;
    }
    return nodes_[static_cast<std::size_t>(idx)].value;
  }

 private:
  using Iter = std::vector<std::uint32_t>::iterator;

  int Grow(Iter begin, Iter end, const std::vector<double>& residual, int depth) {
    const auto count = static_cast<std::size_t>(end - begin);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (Iter it = begin; it != end; ++it) {
      sum += residual[*it];
      sum_sq += residual[*it] * residual[*it];
    }
    const int index = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{});
    split_bin_.push_back(0);
    const double mean = sum / static_cast<double>(count);
    nodes_.back().value = params_.learning_rate * mean;

    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if (depth >= params_.max_depth || count < 2 * min_leaf) return index;

    const double parent_score = sum * sum / static_cast<double>(count);
    const double node_sse = sum_sq - parent_score;
    double best_gain = 1e-12 * std::max(1.0, node_sse);
    int best_feature = -1;
    std::size_t best_bin = 0;
    for (std::size_t f = 0; f < bins_.size(); ++f) {
      const FeatureBins& fb = bins_[f];
      const std::size_t nb = fb.thresholds.size() + 1;
      if (nb < 2) continue;
      std::fill(sums_.begin(), sums_.begin() + static_cast<std::ptrdiff_t>(nb), 0.0);
      std::fill(counts_.begin(), counts_.begin() + static_cast<std::ptrdiff_t>(nb), 0);
      for (Iter it = begin; it != end; ++it) {
        const auto b = fb.bin[*it];
        sums_[b] += residual[*it];
        ++counts_[b];
      }
      double left_sum = 0.0;
      std::size_t left_count = 0;
      for (std::size_t s = 0; s + 1 < nb; ++s) {
        left_sum += sums_[s];
        left_count += counts_[s];
        if (left_count < min_leaf) continue;
        const std::size_t right_count = count - left_count;
        if (right_count < min_leaf) break;
        const double right_sum = sum - left_sum;
        const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                            right_sum * right_sum / static_cast<double>(right_count) -
                            parent_score;
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_bin = s;
        }
      }
    }
    if (best_feature < 0) return index;

    const FeatureBins& fb = bins_[static_cast<std::size_t>(best_feature)];
    const Iter mid = std::stable_partition(begin, end, [&](std::uint32_t r) {
      return fb.bin[r] <= best_bin;
    });
    nodes_[static_cast<std::size_t>(index)].feature = best_feature;
    nodes_[static_cast<std::size_t>(index)].threshold = fb.thresholds[best_bin];
    split_bin_[static_cast<std::size_t>(index)] = static_cast<std::uint16_t>(best_bin);
    const int left = Grow(begin, mid, residual, depth + 1);
    const int right = Grow(mid, end, residual, depth + 1);
    nodes_[static_cast<std::size_t>(index)].left = left;
    nodes_[static_cast<std::size_t>(index)].right = right;
    return index;
  }

  const std::vector<FeatureBins>& bins_;
  const BoostedTreesParams& params_;
  std::vector<Node> nodes_;
  std::vector<std::uint16_t> split_bin_;
  std::vector<double> sums_;
  std::vector<std::size_t> counts_;
};

}  // namespace

void BoostedTreesParams::Validate() const {
  if (rounds < 1) throw ConfigError("boosting rounds must be >= 1");
  if (max_depth < 1) throw ConfigError("tree max_depth must be >= 1");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw ConfigError("learning_rate must lie in (0, 1]");
  }
  if (min_samples_leaf < 1) throw ConfigError("min_samples_leaf must be >= 1");
  if (!(subsample > 0.0 && subsample <= 1.0)) {
    throw ConfigError("subsample must lie in (0, 1]");
  }
  if (max_bins < 2 || max_bins > 65535) {
    throw ConfigError("max_bins must lie in [2, 65535]");
  }
}

BoostedTreesModel::BoostedTreesModel(int num_features, ModelInfo info,
                                     double base_score,
                                     std::vector<std::vector<Node>> trees)
    : PredictionModel(num_features, std::move(info)),
      base_score_(base_score),
      trees_(std::move(trees)) {}

std::set<int> BoostedTreesModel::SplitFeatures() const {
  std::set<int> out;
  for (const auto& tree : trees_) {
    for (const Node& node : tree) {
      if (node.feature >= 0) out.insert(node.feature);
    }
  }
  return out;
}

double BoostedTreesModel::PredictRow(const double* row) const {
  double out = base_score_;
  for (const auto& tree : trees_) {
    int idx = 0;
    while (tree[static_cast<std::size_t>(idx)].feature >= 0) {
      const Node& node = tree[static_cast<std::size_t>(idx)];
      idx = row[node.feature] <= node.threshold ? node.left : node.right;
    }
    out += tree[static_cast<std::size_t>(idx)].value;
  }
  return out;
}

Vector BoostedTreesModel::PredictRows(const FeatureMatrix& x) const {
  Vector out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = PredictRow(x.row(i).data());
  return out;
}

void BoostedTreesModel::PredictIceRows(const FeatureMatrix& rows, int feature,
                                       std::span<const double> grid,
                                       Eigen::Ref<Eigen::MatrixXd> out) const {
  if (!std::is_sorted(grid.begin(), grid.end())) {
    PredictionModel::PredictIceRows(rows, feature, grid, out);
    return;
  }
  // Each tree is piecewise constant in the grid feature: walk it once per row,
  // following both children at splits on that feature, and record leaf values
  // over grid index ranges in a difference array. Trees are visited in the
  // outer loop so that one tree stays in cache for a block of rows.
  const auto g_count = static_cast<std::uint32_t>(grid.size());
  const std::size_t stride = grid.size() + 1;
  std::vector<std::vector<std::uint32_t>> cuts(trees_.size());
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    cuts[t].resize(trees_[t].size(), 0);
    for (std::size_t k = 0; k < trees_[t].size(); ++k) {
      if (trees_[t][k].feature != feature) continue;
      cuts[t][k] = static_cast<std::uint32_t>(
          std::upper_bound(grid.begin(), grid.end(), trees_[t][k].threshold) - grid.begin());
    }
  }
  struct Frame {
    int node;
    std::uint32_t lo;
    std::uint32_t hi;
  };
  // Depth-first with both children pushed: at most one pending frame per level.
  std::vector<Frame> stack(256);
  constexpr Eigen::Index kBlock = 512;
  std::vector<double> diff;
  for (Eigen::Index start = 0; start < rows.rows(); start += kBlock) {
    const Eigen::Index count = std::min(kBlock, rows.rows() - start);
    diff.assign(static_cast<std::size_t>(count) * stride, 0.0);
    for (std::size_t t = 0; t < trees_.size(); ++t) {
      const Node* nodes = trees_[t].data();
      const std::uint32_t* cut = cuts[t].data();
      for (Eigen::Index i = 0; i < count; ++i) {
        const double* row = rows.row(start + i).data();
        double* d = diff.data() + static_cast<std::size_t>(i) * stride;
        std::size_t top = 0;
        stack[top++] = {0, 0, g_count};
        while (top > 0) {
          Frame fr = stack[--top];
          while (true) {
            const Node& node = nodes[fr.node];
            if (node.feature < 0) {
              d[fr.lo] += node.value;
              d[fr.hi] -= node.value;
              break;
            }
            if (node.feature == feature) {
              const std::uint32_t mid = std::clamp(cut[fr.node], fr.lo, fr.hi);
              if (mid >= fr.hi) {
                fr.node = node.left;
              } else if (mid <= fr.lo) {
                fr.node = node.right;
              } else {
                if (top == stack.size()) stack.resize(2 * top);
                stack[top++] = {node.right, mid, fr.hi};
                fr = {node.left, fr.lo, mid};
              }
            } else {
              fr.node = row[node.feature] <= node.threshold ? node.left : node.right;
            }
          }
        }
      }
    }
    for (Eigen::Index i = 0; i < count; ++i) {
      const double* d = diff.data() + static_cast<std::size_t>(i) * stride;
      double acc = base_score_;
      for (std::uint32_t g = 0; g < g_count; ++g) {
        acc += d[g];
        out(start + i, static_cast<Eigen::Index>(g)) = acc;
      }
    }
  }
}

std::shared_ptr<const BoostedTreesModel> FitBoostedTrees(
    const Dataset& data, const BoostedTreesParams& params, std::uint64_t seed,
    ModelInfo info) {
  params.Validate();
  data.Validate();
  const std::size_t n = data.n();
  if (n < 2 * static_cast<std::size_t>(params.min_samples_leaf)) {
    throw FitError("boosted trees need n >= 2 * min_samples_leaf (n=" +
                   std::to_string(n) + ")");
  }
  std::vector<FeatureBins> bins;
  for (int f = 0; f < data.p(); ++f) {
    bins.push_back(BuildBins(data.features, f, params.max_bins));
  }
  const double base = data.target.mean();
  std::vector<double> pred(n, base);
  std::vector<double> residual(n);
  std::vector<std::uint32_t> all_rows(n);
  std::iota(all_rows.begin(), all_rows.end(), 0u);
  const auto sample_size = std::max<std::size_t>(
      2 * static_cast<std::size_t>(params.min_samples_leaf),
      static_cast<std::size_t>(std::floor(params.subsample * static_cast<double>(n))));

  TreeBuilder builder(bins, params);
  std::vector<std::vector<Node>> trees;
  trees.reserve(static_cast<std::size_t>(params.rounds));
  std::vector<std::uint32_t> rows;
  for (int round = 0; round < params.rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      residual[i] = data.target(static_cast<Eigen::Index>(i)) - pred[i];
    }
    rows = all_rows;
    if (sample_size < n) {
      Rng rng = MakeRng(DeriveSeed(seed, {HashTag("subsample"),
                                          static_cast<std::uint64_t>(round)}));
      std::shuffle(rows.begin(), rows.end(), rng);
      rows.resize(sample_size);
      std::sort(rows.begin(), rows.end());
    }
    std::vector<Node> tree = builder.Build(rows, residual);
    for (std::uint32_t i = 0; i < n; ++i) {
      pred[i] += builder.PredictTrainingRow(i);
    }
    trees.push_back(std::move(tree));
  }
  info.kind = ModelKind::kBoostedTrees;
  info.training_seed = seed;
  return std::make_shared<BoostedTreesModel>(data.p(), std::move(info), base,
                                             std::move(trees));
}

}  // namespace effektor
