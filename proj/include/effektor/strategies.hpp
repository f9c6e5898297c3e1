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


#ifndef EFFEKTOR_STRATEGIES_HPP_
#define EFFEKTOR_STRATEGIES_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "effektor/dataset.hpp"
#include "effektor/dgp.hpp"
#include "effektor/effects.hpp"
#include "effektor/learners.hpp"
#include "effektor/model.hpp"

namespace effektor {

enum class StrategyKind { kTrainOnAll, kHoldoutSplit, kKFoldCV };

// CLI names: "train", "val", "cv".
std::string_view StrategyName(StrategyKind kind);
StrategyKind ParseStrategy(std::string_view name);

struct StrategySpec {
  StrategyKind kind = StrategyKind::kTrainOnAll;
  double split_fraction = 0.8;
  std::size_t folds = 5;
  std::uint64_t shuffle_seed = 0;

  void Validate() const;
};

// Fold id of every sample: a seeded permutation cut into contiguous blocks
// whose sizes differ by at most one. Throws DataError if folds > n.
std::vector<std::size_t> SplitFolds(std::size_t n, std::size_t folds,
                                    std::uint64_t seed);

// ceil(fraction * n) guarded against representation error.
std::size_t HoldoutTrainSize(std::size_t n, double fraction);

// Models of one strategy together with the rows each of them is explained on.
struct FittedStrategy {
  StrategySpec spec;
  std::vector<ModelPtr> models;
  std::vector<std::vector<std::size_t>> train_rows;
  std::vector<std::vector<std::size_t>> estimation_rows;
};

FittedStrategy FitStrategy(const LearnerConfig& learner, const Dataset& data,
                           const StrategySpec& strategy, std::uint64_t seed);

// Centered effect of fitted.models[k] on estimation_sets[k], averaged
// pointwise over the models. Empty-bin flags are merged, not raised.
EffectCurve EstimateStrategyEffect(const FittedStrategy& fitted,
                                   std::span<const Dataset> estimation_sets,
                                   EffectKind kind, const GridPtr& grid);

// The estimation rows of `data` for every model.
std::vector<Dataset> EstimationSets(const FittedStrategy& fitted,
                                    const Dataset& data);

// Fresh draws from the data generator with the same per-model sizes as the
// original estimation sets.
std::vector<Dataset> FreshEstimationSets(const FittedStrategy& fitted,
                                         const DgpSpec& spec,
                                         std::uint64_t seed);

// Pointwise mean of centered curves on one grid.
EffectCurve AverageCurves(std::span<const EffectCurve> curves);

struct StrategyResult {
  EffectCurve curve;
  FittedStrategy fitted;
};

StrategyResult RunStrategy(const LearnerConfig& learner, const Dataset& data,
                           const StrategySpec& strategy, EffectKind kind,
                           const GridPtr& grid, std::uint64_t seed);

}  // namespace effektor

#endif  // EFFEKTOR_STRATEGIES_HPP_
