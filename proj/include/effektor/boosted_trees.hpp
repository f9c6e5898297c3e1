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

#ifndef EFFEKTOR_BOOSTED_TREES_HPP_
#define EFFEKTOR_BOOSTED_TREES_HPP_

#include <cstdint>
#include <memory>
#include <set>
#include <vector>

#include "effektor/dataset.hpp"
#include "effektor/model.hpp"

namespace effektor {

struct BoostedTreesParams {
  int rounds = 100;
  int max_depth = 3;
  double learning_rate = 0.1;
  int min_samples_leaf = 5;
  double subsample = 1.0;
  // Candidate thresholds per feature; features with fewer distinct values use
  // every midpoint.
  int max_bins = 128;

  void Validate() const;
};

// Gradient-boosted regression trees on squared error.
class BoostedTreesModel final : public PredictionModel {
 public:
  struct Node {
    int feature = -1;  // -1 marks a leaf.
    double threshold = 0.0;  // x <= threshold goes left.
    int left = -1;
    int right = -1;
    double value = 0.0;
  };

  BoostedTreesModel(int num_features, ModelInfo info, double base_score,
                    std::vector<std::vector<Node>> trees);

  double base_score() const { return base_score_; }
  std::size_t num_trees() const { return trees_.size(); }
  const std::vector<std::vector<Node>>& trees() const { return trees_; }
  // Features used by at least one split.
  std::set<int> SplitFeatures() const;

 protected:
  Vector PredictRows(const FeatureMatrix& x) const override;
  void PredictIceRows(const FeatureMatrix& rows, int feature,
                      std::span<const double> grid,
                      Eigen::Ref<Eigen::MatrixXd> out) const override;

 private:
  double PredictRow(const double* row) const;

  double base_score_;
  std::vector<std::vector<Node>> trees_;
};

// Greedy depth-limited trees fitted to residuals, one per round. Splits are
// chosen by variance reduction over histogram candidate thresholds; ties go to
// the lowest feature index, then the lowest threshold. Row subsampling uses a
// per-round stream derived from `seed`.
// Throws FitError when n < 2 * min_samples_leaf.
std::shared_ptr<const BoostedTreesModel> FitBoostedTrees(
    const Dataset& data, const BoostedTreesParams& params, std::uint64_t seed,
    ModelInfo info);

}  // namespace effektor

#endif  // EFFEKTOR_BOOSTED_TREES_HPP_
