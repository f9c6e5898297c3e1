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


#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "effektor/decomp.hpp"
#include "effektor/dgp.hpp"
#include "effektor/error.hpp"
#include "effektor/learners.hpp"

namespace effektor {
namespace {

CurveEnsemble Ensemble(std::vector<std::vector<double>> rows, std::vector<double> truth) {
  CurveEnsemble e;
  e.curves.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(truth.size()));
  for (std::size_t m = 0; m < rows.size(); ++m) {
    for (std::size_t j = 0; j < truth.size(); ++j) e.curves(m, j) = rows[m][j];
  }
  e.truth = Eigen::Map<Vector>(truth.data(), static_cast<Eigen::Index>(truth.size()));
  return e;
}

CurveEnsemble RandomEnsemble(std::mt19937_64& rng, Eigen::Index m, Eigen::Index g, Eigen::Index r) {
  std::normal_distribution<double> z(0.0, 1.0);
  CurveEnsemble e;
  e.curves = Eigen::MatrixXd::NullaryExpr(m, g, [&] { return 3.0 * z(rng) + 1.0; });
  e.truth = Vector::NullaryExpr(g, [&] { return z(rng); });
  for (Eigen::Index k = 0; k < m && r > 0; ++k) {
    e.repeats.push_back(Eigen::MatrixXd::NullaryExpr(r, g, [&] { return z(rng); }));
  }
  return e;
}

TEST(Estimators, HandExamples) {
  const CurveEnsemble e = Ensemble({{0.0}, {2.0}}, {1.0});
  EXPECT_DOUBLE_EQ(MseHat(e)(0), 1.0);
  EXPECT_DOUBLE_EQ(BiasHat(e)(0), 0.0);
  EXPECT_DOUBLE_EQ(VarHat(e)(0), 2.0);
  EXPECT_DOUBLE_EQ(VarHat(Ensemble({{0.0}, {1.0}, {2.0}}, {0.0}))(0), 1.0);

  const CurveEnsemble exact = Ensemble({{1.0, 2.0}, {1.0, 2.0}}, {1.0, 2.0});
  EXPECT_EQ(MseHat(exact), Vector::Zero(2));
  EXPECT_EQ(BiasHat(exact), Vector::Zero(2));
  EXPECT_EQ(VarHat(exact), Vector::Zero(2));

  EXPECT_NEAR(BiasHat(Ensemble({{0.7, 1.7}, {0.7, 1.7}}, {1.0, 2.0}))(1), 0.3, 1e-15);
  EXPECT_NEAR(MseHat(Ensemble({{1.5, 2.5}, {1.5, 2.5}}, {1.0, 2.0}))(0), 0.25, 1e-15);
}

TEST(Estimators, EstimationVarianceExamples) {
  CurveEnsemble one = Ensemble({{1.0}}, {0.0});
  Eigen::MatrixXd rep(2, 1);
  rep << 0.0, 2.0;
  one.repeats = {rep};
  EXPECT_DOUBLE_EQ(VarEstHat(one)(0), 2.0);

  CurveEnsemble two = Ensemble({{1.0}, {1.0}}, {0.0});
  Eigen::MatrixXd flat(2, 1);
  flat << 1.0, 1.0;
  two.repeats = {rep, flat};
  EXPECT_DOUBLE_EQ(VarEstHat(two)(0), 1.0);

  CurveEnsemble same = Ensemble({{1.0}, {2.0}}, {0.0});
  same.repeats = {flat, flat};
  EXPECT_DOUBLE_EQ(VarEstHat(same)(0), 0.0);
}

TEST(Estimators, Preconditions) {
  EXPECT_THROW(VarHat(Ensemble({{1.0}}, {0.0})), DataError);
  EXPECT_THROW(VarEstHat(Ensemble({{1.0}, {2.0}}, {0.0})), DataError);
  CurveEnsemble wide = Ensemble({{1.0}}, {0.0});
  wide.curves.resize(1, 2);
  EXPECT_THROW(MseHat(wide), DataError);
  CurveEnsemble e = Ensemble({{1.0}, {2.0}}, {0.0});
  e.repeats = {Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Zero(1, 1)};
  EXPECT_THROW(VarEstHat(e), DataError);
  e.repeats = {Eigen::MatrixXd::Zero(2, 1)};
  EXPECT_THROW(VarEstHat(e), DataError);
}

TEST(Estimators, MseIdentityOnRandomEnsembles) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> m_dist(2, 50), g_dist(1, 200);
  for (int trial = 0; trial < 100; ++trial) {
    const CurveEnsemble e = RandomEnsemble(rng, m_dist(rng), g_dist(rng), 0);
    const double m = static_cast<double>(e.M());
    const Vector rhs = BiasHat(e).array().square() + (m - 1.0) / m * VarHat(e).array();
    EXPECT_LT((MseHat(e) - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Estimators, ShiftInvarianceAndEquivariance) {
  std::mt19937_64 rng(5);
  const CurveEnsemble e = RandomEnsemble(rng, 7, 30, 4);
  const Vector c = Vector::LinSpaced(30, -3.0, 8.0);
  CurveEnsemble shifted = e;
  shifted.curves.rowwise() += c.transpose();
  for (auto& block : shifted.repeats) block.rowwise() += c.transpose();
  EXPECT_LT((VarHat(shifted) - VarHat(e)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((VarEstHat(shifted) - VarEstHat(e)).cwiseAbs().maxCoeff(), 1e-12);
  shifted.truth += c;
  EXPECT_LT((MseHat(shifted) - MseHat(e)).cwiseAbs().maxCoeff(), 1e-10);
  EXPECT_LT((BiasHat(shifted) - BiasHat(e)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SplitVariance, Examples) {
  Vector tot(3), est(3);
  tot << 0.5, 0.4, 0.1;
  est << 0.2, 0.4, 0.3;
  const VarianceSplit s = SplitVariance(tot, est);
  EXPECT_NEAR(s.var_model(0), 0.3, 1e-15);
  EXPECT_DOUBLE_EQ(s.var_model(1), 0.0);
  EXPECT_TRUE(std::isnan(s.var_model(2)));
  EXPECT_EQ(s.missing, (std::vector<bool>{false, false, true}));
  EXPECT_EQ(s.num_missing(), 1u);
  EXPECT_THROW(SplitVariance(tot, Vector::Zero(2)), DataError);
}

TEST(SplitVariance, NeverNegative) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vector tot = Vector::NullaryExpr(500, [&] { return u(rng); });
  const Vector est = Vector::NullaryExpr(500, [&] { return u(rng); });
  const VarianceSplit s = SplitVariance(tot, est);
  for (Eigen::Index j = 0; j < 500; ++j) {
    EXPECT_TRUE(s.missing[j] ? std::isnan(s.var_model(j)) : s.var_model(j) >= 0.0);
  }
}

TEST(Aggregate, Examples) {
  EXPECT_DOUBLE_EQ(Aggregate(Vector::Constant(4, 2.5)), 2.5);
  Vector b(2);
  b << 0.1, -0.1;
  EXPECT_DOUBLE_EQ(Aggregate(b, true), 0.1);
  EXPECT_DOUBLE_EQ(Aggregate(b), 0.0);
  Vector mse(2);
  mse << 1.0, 3.0;
  EXPECT_DOUBLE_EQ(Aggregate(mse), 2.0);
  Vector gaps(3);
  gaps << 1.0, NAN, 3.0;
  EXPECT_DOUBLE_EQ(Aggregate(gaps), 2.0);
  EXPECT_THROW(Aggregate(Vector()), DataError);
}

TEST(Decompose, FullReport) {
  std::mt19937_64 rng(2);
  const CurveEnsemble e = RandomEnsemble(rng, 10, 8, 5);
  const ErrorReport r = Decompose(e);
  EXPECT_EQ(r.M, 10u);
  EXPECT_EQ(r.R, 5u);
  EXPECT_DOUBLE_EQ(r.bias_agg, r.bias.cwiseAbs().mean());
  EXPECT_EQ(r.var_est.size(), 8);
  EXPECT_EQ(r.var_model_missing.size(), 8u);
}

TEST(VarianceBounds, IdenticalAndShiftedModels) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  const GridPtr grid = BuildGrid(spec, 0, 20);
  const ModelPtr f = MakeGroundTruthModel(spec);
  const std::vector<ModelPtr> same{f, f, f};
  const VarianceBoundReport r0 = CheckVarianceBounds(same, spec, grid, 2000, 1);
  EXPECT_LT(r0.pd.lhs.cwiseAbs().maxCoeff(), 1e-20);
  EXPECT_LT(r0.pd.rhs.cwiseAbs().maxCoeff(), 1e-20);
  EXPECT_LT(r0.ale.lhs.cwiseAbs().maxCoeff(), 1e-20);
  EXPECT_TRUE(r0.pd.all_satisfied() && r0.ale.all_satisfied());

  std::vector<ModelPtr> shifted;
  const std::vector<double> c{-1.0, 0.5, 2.0};
  for (const double cm : c) {
    shifted.push_back(MakeFunctionModel(4, [spec, cm](std::span<const double> x) {
      return GroundTruth(spec, x) + cm;
    }));
  }
  const double var_c = (1.0 + 0.25 + 4.0 - 3.0 * 0.25) / 2.0;  // sample variance of c
  const VarianceBoundReport r1 = CheckVarianceBounds(shifted, spec, grid, 2000, 1);
  EXPECT_LT((r1.pd.lhs.array() - var_c).abs().maxCoeff(), 1e-9);
  EXPECT_LT((r1.pd.rhs.array() - var_c).abs().maxCoeff(), 1e-9);
  EXPECT_LT(r1.ale.lhs.cwiseAbs().maxCoeff(), 1e-18);
  EXPECT_LT(r1.ale.rhs.cwiseAbs().maxCoeff(), 1e-18);
  EXPECT_THROW(CheckVarianceBounds(std::vector<ModelPtr>{f}, spec, grid, 100, 1), DataError);
}

TEST(VarianceBounds, HoldForBoostedTrees) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  const NoiseCalibration cal = CalibrateNoise(spec, 5.0, 100000, 1);
  const LearnerConfig cfg =
      PresetConfig(LearnerKind::kBoostedTrees, LearnerMode::kOT, spec.setting(), 1250);
  std::vector<ModelPtr> models;
  for (std::uint64_t m = 0; m < 2; ++m) {
    models.push_back(FitLearner(cfg, SampleDataset(spec, 1250, cal, 40 + m), m));
  }
  for (const int feature : {0, 1}) {
    const GridPtr grid = BuildGrid(spec, feature, 100);
    const VarianceBoundReport r = CheckVarianceBounds(models, spec, grid, 100000, 3);
    EXPECT_TRUE(r.pd.all_satisfied());
    EXPECT_TRUE(r.ale.all_satisfied());
    EXPECT_GT(r.pd.rhs.maxCoeff(), 0.0);
  }
}

TEST(VarianceBounds, HoldForAnalyticFamily) {
  // f_m = f + a_m x1 x2 + b_m sin(x1): interactions vary across members.
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  std::vector<ModelPtr> models;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int m = 0; m < 6; ++m) {
    const double a = z(rng), b = z(rng);
    models.push_back(MakeFunctionModel(4, [spec, a, b](std::span<const double> x) {
      return GroundTruth(spec, x) + a * x[0] * x[1] + b * std::sin(x[0]);
    }));
  }
  for (const int feature : {0, 1}) {
    const VarianceBoundReport r =
        CheckVarianceBounds(models, spec, BuildGrid(spec, feature, 50), 20000, 5);
    EXPECT_TRUE(r.pd.all_satisfied());
    EXPECT_TRUE(r.ale.all_satisfied());
  }
}

}  // namespace
}  // namespace effektor
