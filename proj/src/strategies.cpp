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

#include "effektor/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "effektor/error.hpp"
#include "effektor/random.hpp"

namespace effektor {
namespace {

std::vector<std::size_t> Permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = MakeRng(DeriveSeed(seed, {HashTag("shuffle")}));
  std::shuffle(order.begin(), order.end(), rng);
  return order;
}

}  // namespace

std::string_view StrategyName(StrategyKind kind) {
  switch (kind) {
    case StrategyKind::kTrainOnAll: return "train";
    case StrategyKind::kHoldoutSplit: return "val";
    case StrategyKind::kKFoldCV: return "cv";
  }
  return "?";
}

StrategyKind ParseStrategy(std::string_view name) {
  if (name == "train") return StrategyKind::kTrainOnAll;
  if (name == "val") return StrategyKind::kHoldoutSplit;
  if (name == "cv") return StrategyKind::kKFoldCV;
  throw ConfigError("unknown strategy '" + std::string(name) +
                    "' (expected train, val or cv)");
}

void StrategySpec::Validate() const {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw ConfigError("split_fraction must lie in (0, 1)");
  }
  if (folds < 2) throw ConfigError("folds must be at least 2");
}

std::vector<std::size_t> SplitFolds(std::size_t n, std::size_t folds,
                                    std::uint64_t seed) {
  if (folds == 0) throw DataError("folds must be positive");
  if (folds > n) {
    throw DataError("cannot split " + std::to_string(n) + " samples into " +
                    std::to_string(folds) + " folds");
  }
  const std::vector<std::size_t> order = Permutation(n, seed);
  std::vector<std::size_t> fold_of(n);
  const std::size_t base = n / folds;
  const std::size_t extra = n % folds;
  std::size_t pos = 0;
  for (std::size_t f = 0; f < folds; ++f) {
    const std::size_t size = base + (f < extra ? 1 : 0);
    for (std::size_t j = 0; j < size; ++j) fold_of[order[pos++]] = f;
  }
  return fold_of;
}

std::size_t HoldoutTrainSize(std::size_t n, double fraction) {
  return static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
}

FittedStrategy FitStrategy(const LearnerConfig& learner, const Dataset& data,
                           const StrategySpec& strategy, std::uint64_t seed) {
  strategy.Validate();
  FittedStrategy fitted;
  fitted.spec = strategy;
  const std::size_t n = data.n();
  switch (strategy.kind) {
    case StrategyKind::kTrainOnAll: {
      std::vector<std::size_t> all(n);
      std::iota(all.begin(), all.end(), std::size_t{0});
      fitted.models.push_back(FitLearner(learner, data, DeriveSeed(seed, {HashTag("train")})));
      fitted.train_rows.push_back(all);
      fitted.estimation_rows.push_back(std::move(all));
      break;
    }
    case StrategyKind::kHoldoutSplit: {
      const std::size_t n_train = HoldoutTrainSize(n, strategy.split_fraction);
      if (n_train == 0 || n_train >= n) {
        throw DataError("holdout split of " + std::to_string(n) +
                        " samples leaves an empty side");
      }
      std::vector<std::size_t> order = Permutation(n, strategy.shuffle_seed);
      std::vector<std::size_t> train(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
      std::vector<std::size_t> rest(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
      fitted.models.push_back(
          FitLearner(learner, data.Subset(train), DeriveSeed(seed, {HashTag("val")})));
      fitted.train_rows.push_back(std::move(train));
      fitted.estimation_rows.push_back(std::move(rest));
      break;
    }
    case StrategyKind::kKFoldCV: {
      const std::vector<std::size_t> fold_of = SplitFolds(n, strategy.folds, strategy.shuffle_seed);
      for (std::size_t f = 0; f < strategy.folds; ++f) {
        std::vector<std::size_t> train;
        std::vector<std::size_t> held;
        for (std::size_t i = 0; i < n; ++i) (fold_of[i] == f ? held : train).push_back(i);
        fitted.models.push_back(FitLearner(learner, data.Subset(train),
                                           DeriveSeed(seed, {HashTag("cv"), f})));
        fitted.train_rows.push_back(std::move(train));
        fitted.estimation_rows.push_back(std::move(held));
      }
      break;
    }
  }
  return fitted;
}

EffectCurve AverageCurves(std::span<const EffectCurve> curves) {
  if (curves.empty()) throw DataError("no curves to average");
  EffectCurve out = curves.front();
  const bool have_se = std::all_of(curves.begin(), curves.end(), [](const EffectCurve& c) {
    return c.standard_errors.size() == c.values.size();
  });
  Vector se_sq = have_se ? Vector(out.standard_errors.array().square()) : Vector();
  for (std::size_t k = 1; k < curves.size(); ++k) {
    const EffectCurve& c = curves[k];
    if (c.grid != out.grid || c.kind != out.kind || c.centered != out.centered) {
      throw DataError("cannot average curves on different grids or of different kinds");
    }
    out.values += c.values;
    if (have_se) se_sq.array() += c.standard_errors.array().square();
    out.n_used += c.n_used;
    for (std::size_t b = 0; b < out.bin_counts.size() && b < c.bin_counts.size(); ++b) {
      out.bin_counts[b] += c.bin_counts[b];
      out.empty_bins[b] = out.empty_bins[b] || c.empty_bins[b];
    }
  }
  const auto m = static_cast<double>(curves.size());
  out.values /= m;
  if (have_se) {
    out.standard_errors = se_sq.array().sqrt() / m;
  } else {
    out.standard_errors.resize(0);
  }
  out.centered_standard_errors.resize(0);
  return out;
}

EffectCurve EstimateStrategyEffect(const FittedStrategy& fitted,
                                   std::span<const Dataset> estimation_sets,
                                   EffectKind kind, const GridPtr& grid) {
  if (estimation_sets.size() != fitted.models.size()) {
    throw DataError("need one estimation set per fitted model");
  }
  std::vector<EffectCurve> curves;
  curves.reserve(fitted.models.size());
  for (std::size_t k = 0; k < fitted.models.size(); ++k) {
    curves.push_back(
        CenterCurve(EstimateEffect(*fitted.models[k], estimation_sets[k], kind, grid)));
  }
  return AverageCurves(curves);
}

std::vector<Dataset> EstimationSets(const FittedStrategy& fitted, const Dataset& data) {
  std::vector<Dataset> sets;
  sets.reserve(fitted.estimation_rows.size());
  for (const auto& rows : fitted.estimation_rows) sets.push_back(data.Subset(rows));
  return sets;
}

std::vector<Dataset> FreshEstimationSets(const FittedStrategy& fitted, const DgpSpec& spec,
                                         std::uint64_t seed) {
  std::vector<Dataset> sets;
  sets.reserve(fitted.estimation_rows.size());
  for (std::size_t k = 0; k < fitted.estimation_rows.size(); ++k) {
    Dataset d;
    d.setting = spec.setting();
    d.seed = DeriveSeed(seed, {k});
    d.features = SampleFeatures(spec, fitted.estimation_rows[k].size(), d.seed);
    d.target = Vector::Zero(d.features.rows());
    sets.push_back(std::move(d));
  }
  return sets;
}

StrategyResult RunStrategy(const LearnerConfig& learner, const Dataset& data,
                           const StrategySpec& strategy, EffectKind kind,
                           const GridPtr& grid, std::uint64_t seed) {
  StrategyResult result;
  result.fitted = FitStrategy(learner, data, strategy, seed);
  const std::vector<Dataset> sets = EstimationSets(result.fitted, data);
  result.curve = EstimateStrategyEffect(result.fitted, sets, kind, grid);
  return result;
}

}  // namespace effektor
