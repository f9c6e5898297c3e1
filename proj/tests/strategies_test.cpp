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


#include <algorithm>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "effektor/dgp.hpp"
#include "effektor/error.hpp"
#include "effektor/learners.hpp"
#include "effektor/strategies.hpp"

namespace effektor {
namespace {

StrategySpec Spec(StrategyKind kind, std::uint64_t seed = 3) {
  StrategySpec s;
  s.kind = kind;
  s.shuffle_seed = seed;
  return s;
}

Dataset Data(Setting setting, std::size_t n, std::uint64_t seed) {
  const DgpSpec spec = DgpSpec::Make(setting);
  NoiseCalibration cal;
  cal.sigma_eps = 0.5;
  return SampleDataset(spec, n, cal, seed);
}

LearnerConfig Trees() {
  return PresetConfig(LearnerKind::kBoostedTrees, LearnerMode::kOT, Setting::kSimpleNormalCorrelated,
                      500);
}

std::vector<std::size_t> FoldSizes(const std::vector<std::size_t>& fold_of, std::size_t folds) {
  std::vector<std::size_t> sizes(folds, 0);
  for (const std::size_t f : fold_of) ++sizes[f];
  return sizes;
}

TEST(SplitFolds, SizesAndDeterminism) {
  EXPECT_EQ(FoldSizes(SplitFolds(10, 5, 1), 5), (std::vector<std::size_t>(5, 2)));
  std::vector<std::size_t> sizes = FoldSizes(SplitFolds(11, 5, 1), 5);
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<std::size_t>{2, 2, 2, 2, 3}));
  EXPECT_EQ(SplitFolds(97, 5, 42), SplitFolds(97, 5, 42));
  EXPECT_NE(SplitFolds(97, 5, 42), SplitFolds(97, 5, 43));
  EXPECT_THROW(SplitFolds(4, 5, 1), DataError);
}

TEST(StrategySpec, NamesAndValidation) {
  EXPECT_EQ(ParseStrategy("train"), StrategyKind::kTrainOnAll);
  EXPECT_EQ(ParseStrategy("val"), StrategyKind::kHoldoutSplit);
  EXPECT_EQ(ParseStrategy("cv"), StrategyKind::kKFoldCV);
  EXPECT_EQ(StrategyName(StrategyKind::kKFoldCV), "cv");
  EXPECT_THROW(ParseStrategy("loo"), ConfigError);
  StrategySpec s;
  s.split_fraction = 1.0;
  EXPECT_THROW(s.Validate(), ConfigError);
  s.split_fraction = 0.8;
  s.folds = 1;
  EXPECT_THROW(s.Validate(), ConfigError);
}

TEST(FitStrategy, HoldoutBookkeeping) {
  EXPECT_EQ(HoldoutTrainSize(1250, 0.8), 1000u);
  EXPECT_EQ(HoldoutTrainSize(1251, 0.8), 1001u);
  const Dataset d = Data(Setting::kSimpleNormalCorrelated, 1251, 1);
  const DgpSpec spec = DgpSpec::Make(d.setting);
  const GridPtr grid = BuildGrid(spec, 0, 20);
  const StrategyResult r = RunStrategy(Trees(), d, Spec(StrategyKind::kHoldoutSplit), EffectKind::kPd, grid, 5);
  EXPECT_EQ(r.curve.n_used, 1251u - 1001u);
  std::vector<std::size_t> all = r.fitted.train_rows[0];
  all.insert(all.end(), r.fitted.estimation_rows[0].begin(), r.fitted.estimation_rows[0].end());
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
  EXPECT_EQ(all.size(), 1251u);
  const StrategyResult t = RunStrategy(Trees(), d, Spec(StrategyKind::kTrainOnAll), EffectKind::kPd, grid, 5);
  EXPECT_EQ(t.curve.n_used, 1251u);
}

TEST(FitStrategy, CrossValidationUsesEverySampleOnce) {
  const Dataset d = Data(Setting::kSimpleNormalCorrelated, 503, 2);
  const FittedStrategy f = FitStrategy(Trees(), d, Spec(StrategyKind::kKFoldCV), 9);
  ASSERT_EQ(f.models.size(), 5u);
  std::vector<int> est(503, 0), train(503, 0);
  for (std::size_t k = 0; k < 5; ++k) {
    for (const std::size_t i : f.estimation_rows[k]) ++est[i];
    for (const std::size_t i : f.train_rows[k]) ++train[i];
  }
  EXPECT_TRUE(std::all_of(est.begin(), est.end(), [](int c) { return c == 1; }));
  EXPECT_TRUE(std::all_of(train.begin(), train.end(), [](int c) { return c == 4; }));
}

TEST(RunStrategy, GroundTruthLearnerAgreesAcrossStrategies) {
  const Dataset d = Data(Setting::kSimpleNormalCorrelated, 50000, 4);
  const DgpSpec spec = DgpSpec::Make(d.setting);
  LearnerConfig gt;
  gt.learner = LearnerKind::kGroundTruth;
  for (const int feature : {0, 1}) {
    const GridPtr grid = BuildGrid(spec, feature, 100);
    std::vector<EffectCurve> curves;
    for (const StrategyKind k : {StrategyKind::kTrainOnAll, StrategyKind::kHoldoutSplit, StrategyKind::kKFoldCV}) {
      curves.push_back(RunStrategy(gt, d, Spec(k), EffectKind::kPd, grid, 1).curve);
    }
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a + 1; b < 3; ++b) {
        // Train and CV estimate on the same rows; val uses a subset of them.
        const Vector diff = (curves[a].Evaluated() - curves[b].Evaluated()).cwiseAbs();
        const Vector se = (curves[a].EvaluatedStandardErrors().array().square() +
                           curves[b].EvaluatedStandardErrors().array().square()).sqrt();
        EXPECT_TRUE((diff.array() <= 3.0 * se.array()).all()) << a << " vs " << b;
      }
    }
  }
}

TEST(RunStrategy, IdenticalFoldsAverageToSingleCurve) {
  const Dataset d = Data(Setting::kFriedman1, 300, 6);
  const DgpSpec spec = DgpSpec::Make(d.setting);
  const GridPtr grid = BuildGrid(spec, 0, 30);
  const FittedStrategy single = FitStrategy(Trees(), d, Spec(StrategyKind::kTrainOnAll), 2);
  FittedStrategy five;
  five.spec = Spec(StrategyKind::kKFoldCV);
  for (int k = 0; k < 5; ++k) {
    five.models.push_back(single.models[0]);
    five.estimation_rows.push_back(single.estimation_rows[0]);
    five.train_rows.push_back(single.train_rows[0]);
  }
  for (const EffectKind kind : {EffectKind::kPd, EffectKind::kAle}) {
    const EffectCurve a = EstimateStrategyEffect(single, EstimationSets(single, d), kind, grid);
    const EffectCurve b = EstimateStrategyEffect(five, EstimationSets(five, d), kind, grid);
    EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RunStrategy, CenteringCommutesWithFoldAveraging) {
  const Dataset d = Data(Setting::kSimpleNormalCorrelated, 600, 7);
  const DgpSpec spec = DgpSpec::Make(d.setting);
  const GridPtr grid = BuildGrid(spec, 1, 100);
  const FittedStrategy f = FitStrategy(Trees(), d, Spec(StrategyKind::kKFoldCV), 3);
  const std::vector<Dataset> sets = EstimationSets(f, d);
  for (const EffectKind kind : {EffectKind::kPd, EffectKind::kAle}) {
    std::vector<EffectCurve> raw;
    for (std::size_t k = 0; k < f.models.size(); ++k) {
      raw.push_back(EstimateEffect(*f.models[k], sets[k], kind, grid));
    }
    Vector mean_raw = Vector::Zero(raw[0].values.size());
    for (const auto& c : raw) mean_raw += c.values / 5.0;
    EffectCurve avg = raw[0];
    avg.values = mean_raw;
    const Vector avg_then_center = CenterCurve(avg).values;
    const Vector center_then_avg = EstimateStrategyEffect(f, sets, kind, grid).values;
    EXPECT_LT((avg_then_center - center_then_avg).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(RunStrategy, Deterministic) {
  const Dataset d = Data(Setting::kSimpleNormalCorrelated, 400, 8);
  const GridPtr grid = BuildGrid(DgpSpec::Make(d.setting), 0, 25);
  LearnerConfig cfg = Trees();
  cfg.trees.subsample = 0.6;
  for (const StrategyKind k : {StrategyKind::kTrainOnAll, StrategyKind::kHoldoutSplit, StrategyKind::kKFoldCV}) {
    const Vector a = RunStrategy(cfg, d, Spec(k), EffectKind::kAle, grid, 11).curve.values;
    const Vector b = RunStrategy(cfg, d, Spec(k), EffectKind::kAle, grid, 11).curve.values;
    EXPECT_EQ(a, b);
  }
}

TEST(RunStrategy, SmallFoldsFlagEmptyBinsWithoutFailing) {
  const Dataset d = Data(Setting::kFriedman1, 60, 9);
  const GridPtr grid = BuildGrid(DgpSpec::Make(d.setting), 0, 100);
  LearnerConfig gt;
  gt.learner = LearnerKind::kGroundTruth;
  const StrategyResult r = RunStrategy(gt, d, Spec(StrategyKind::kKFoldCV), EffectKind::kAle, grid, 1);
  EXPECT_TRUE(r.curve.has_empty_bins());
  EXPECT_TRUE(r.curve.values.allFinite());
  EXPECT_EQ(r.curve.n_used, 60u);
}

}  // namespace
}  // namespace effektor
