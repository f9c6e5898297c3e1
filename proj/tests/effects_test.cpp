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
#include <limits>
#include <vector>

#include <boost/math/distributions/normal.hpp>
#include <gtest/gtest.h>

#include "effektor/dgp.hpp"
#include "effektor/effects.hpp"
#include "effektor/error.hpp"
#include "effektor/model.hpp"

namespace effektor {
namespace {

Dataset FromFeatures(FeatureMatrix x, Setting setting = Setting::kFriedman1) {
  Dataset d;
  d.features = std::move(x);
  d.target = Vector::Zero(d.features.rows());
  d.setting = setting;
  return d;
}

Dataset Column(std::vector<std::vector<double>> rows) {
  FeatureMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) x(i, j) = rows[i][j];
  }
  return FromFeatures(std::move(x));
}

ModelPtr Fn(int p, RowFunction f) { return MakeFunctionModel(p, std::move(f)); }

// E[X | a < X <= b] for a standard normal; infinite bounds allowed.
double TruncatedNormalMean(double a, double b) {
  const boost::math::normal n;
  const double pa = std::isinf(a) ? 0.0 : boost::math::pdf(n, a);
  const double pb = std::isinf(b) ? 0.0 : boost::math::pdf(n, b);
  const double ca = std::isinf(a) ? 0.0 : boost::math::cdf(n, a);
  const double cb = std::isinf(b) ? 1.0 : boost::math::cdf(n, b);
  return (pa - pb) / (cb - ca);
}

// Exact binned uncentered ALE of f1 = x1 + x2^2/2 + x1 x2 with corr 0.9 under
// the clamping rule: E[X_other | X_s in bin] = rho * truncated mean.
std::vector<double> ExactBinnedAleF1(const EffectGrid& grid) {
  const double rho = 0.9;
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> out(grid.size(), 0.0);
  const std::size_t k_count = grid.num_bins();
  for (std::size_t b = 0; b < k_count; ++b) {
    const double lo = grid.points[b], hi = grid.points[b + 1];
    const double a = b == 0 ? -inf : lo;
    const double c = b + 1 == k_count ? inf : hi;
    const double other = rho * TruncatedNormalMean(a, c);
    const double delta = grid.feature == 0 ? (hi - lo) * (1.0 + other)
                                           : 0.5 * (hi * hi - lo * lo) + (hi - lo) * other;
    out[b + 1] = out[b] + delta;
  }
  return out;
}

TEST(BuildGrid, UniformQuantiles) {
  const DgpSpec spec = DgpSpec::Make(Setting::kFriedman1);
  const GridPtr g = BuildGrid(spec, 0, 4);
  ASSERT_EQ(g->size(), 4u);
  EXPECT_DOUBLE_EQ(g->points[0], 0.125);
  EXPECT_DOUBLE_EQ(g->points[1], 0.375);
  EXPECT_DOUBLE_EQ(g->points[2], 0.625);
  EXPECT_DOUBLE_EQ(g->points[3], 0.875);
  EXPECT_EQ(g->evaluated, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(g->num_bins(), 3u);
}

TEST(BuildGrid, NormalQuantilesAndMask) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  const GridPtr g = BuildGrid(spec, 0, 100);
  EXPECT_NEAR(g->points[50], 0.012533469508069276, 1e-12);
  EXPECT_EQ(g->evaluated.size(), 98u);
  EXPECT_EQ(BuildGrid(spec, 1, 3)->evaluated.size(), 1u);
  EXPECT_THROW(BuildGrid(spec, 1, 2), DomainError);
  EXPECT_THROW(ExplicitGrid(0, {1.0, 1.0}), DomainError);
  EXPECT_THROW(ExplicitGrid(0, {1.0}), DomainError);
}

TEST(EstimateIce, HandCases) {
  const GridPtr grid = ExplicitGrid(0, {-1.0, 0.5, 2.0});
  const Dataset d = Column({{0.3, -1.0}, {0.9, 1.0}, {0.1, 1.0}});
  const Eigen::MatrixXd prod =
      EstimateIce(*Fn(2, [](std::span<const double> r) { return r[0] * r[1]; }), d, *grid);
  for (int g = 0; g < 3; ++g) {
    EXPECT_DOUBLE_EQ(prod(0, g), -grid->points[g]);
    EXPECT_DOUBLE_EQ(prod(1, g), grid->points[g]);
  }
  const Eigen::MatrixXd c = EstimateIce(*Fn(2, [](std::span<const double>) { return 7.0; }), d, *grid);
  EXPECT_TRUE((c.array() == 7.0).all());
  const Eigen::MatrixXd add = EstimateIce(
      *Fn(2, [](std::span<const double> r) { return r[0] * r[0] + std::exp(r[1]); }), d, *grid);
  for (Eigen::Index i = 1; i < 3; ++i) {
    const Eigen::RowVectorXd diff = add.row(i) - add.row(0);
    EXPECT_NEAR(diff.maxCoeff() - diff.minCoeff(), 0.0, 1e-12);
  }
  EXPECT_THROW(EstimateIce(*Fn(3, [](std::span<const double>) { return 0.0; }), d, *grid),
               DataError);
}

TEST(EstimatePd, HandCases) {
  const GridPtr grid = ExplicitGrid(0, {-1.0, 0.5, 2.0});
  const Dataset d = Column({{0.3, -1.0}, {0.9, 1.0}});
  const EffectCurve pd = EstimatePd(*Fn(2, [](std::span<const double> r) { return r[0] * r[1]; }), d, grid);
  EXPECT_TRUE((pd.values.array() == 0.0).all());
  EXPECT_EQ(pd.n_used, 2u);
  EXPECT_FALSE(pd.centered);
  const EffectCurve c = EstimatePd(*Fn(2, [](std::span<const double>) { return 3.5; }), d, grid);
  EXPECT_TRUE((c.values.array() == 3.5).all());
}

TEST(EstimatePd, GroundTruthAtOne) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  const GridPtr grid = ExplicitGrid(0, {-1.0, 1.0, 2.0});
  const Dataset d = FromFeatures(SampleFeatures(spec, 100000, 3), spec.setting());
  const EffectCurve pd = EstimatePd(*MakeGroundTruthModel(spec), d, grid);
  EXPECT_NEAR(pd.values(1), 1.5, 3.0 * pd.standard_errors(1));
}

TEST(EstimatePd, Linearity) {
  const DgpSpec spec = DgpSpec::Make(Setting::kFriedman1);
  const Dataset d = FromFeatures(SampleFeatures(spec, 500, 4));
  const GridPtr grid = BuildGrid(spec, 1, 30);
  auto h1 = [](std::span<const double> r) { return std::sin(4 * r[0] * r[1]) + r[2]; };
  auto h2 = [](std::span<const double> r) { return r[1] * r[1] * r[3]; };
  const Vector a = EstimatePd(*Fn(7, h1), d, grid).values;
  const Vector b = EstimatePd(*Fn(7, h2), d, grid).values;
  const Vector ab = EstimatePd(*Fn(7, [&](std::span<const double> r) { return 2.5 * h1(r) - 1.5 * h2(r); }), d, grid).values;
  EXPECT_LT((ab - (2.5 * a - 1.5 * b)).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(EstimatePd, CenteredAdditiveIndependentOfRows) {
  const DgpSpec spec = DgpSpec::Make(Setting::kFriedman1);
  const FeatureMatrix x = SampleFeatures(spec, 400, 5);
  const GridPtr grid = BuildGrid(spec, 3, 50);
  const ModelPtr additive = Fn(7, [](std::span<const double> r) {
    return 10 * r[3] + std::sin(6 * r[0] * r[1]) + r[2] * r[2];
  });
  const EffectCurve a = CenterCurve(EstimatePd(*additive, FromFeatures(x.topRows(200)), grid));
  const EffectCurve b = CenterCurve(EstimatePd(*additive, FromFeatures(x.bottomRows(200)), grid));
  EXPECT_LT((a.values - b.values).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(MakeBins, HandCases) {
  const GridPtr grid = ExplicitGrid(0, {0.0, 1.0, 2.0});
  const BinPartition bins = MakeBins(grid, Column({{0.5}, {1.5}, {1.5}}));
  EXPECT_EQ(bins.counts, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(bins.assignment, (std::vector<std::size_t>{0, 1, 1}));
  const BinPartition low = MakeBins(grid, Column({{-3.0}, {-0.1}, {0.0}}));
  EXPECT_EQ(low.counts, (std::vector<std::size_t>{3, 0}));
  const BinPartition high = MakeBins(grid, Column({{1.0}, {2.0}, {9.0}}));
  EXPECT_EQ(high.counts, (std::vector<std::size_t>{1, 2}));
}

TEST(MakeBins, CountsConcentrate) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  const GridPtr grid = BuildGrid(spec, 1, 100);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const BinPartition bins = MakeBins(grid, FromFeatures(SampleFeatures(spec, 10000, seed)));
    std::size_t total = 0;
    // Interior bins hold probability 1/G; the two end bins also absorb the tails.
    for (std::size_t b = 0; b < bins.num_bins(); ++b) {
      total += bins.counts[b];
      const double expected = (b == 0 || b + 1 == bins.num_bins()) ? 150.0 : 100.0;
      EXPECT_GT(bins.counts[b], expected * 0.5);
      EXPECT_LT(bins.counts[b], expected * 1.5);
    }
    EXPECT_EQ(total, 10000u);
  }
}

TEST(EstimateAle, HandCases) {
  const GridPtr grid = ExplicitGrid(0, {0.0, 1.0, 2.0});
  const Dataset d = Column({{0.5, 2.0}, {1.5, -1.0}, {0.2, 5.0}});
  const ModelPtr lin = Fn(2, [](std::span<const double> r) { return 3 * r[0] + r[1] * r[1]; });
  const EffectCurve ale = EstimateAle(*lin, d, MakeBins(grid, d));
  EXPECT_NEAR(ale.values(0), 0.0, 0.0);
  EXPECT_NEAR(ale.values(1), 3.0, 1e-12);
  EXPECT_NEAR(ale.values(2), 6.0, 1e-12);
  const EffectCurve c = EstimateAle(*Fn(2, [](std::span<const double>) { return 1.0; }), d, MakeBins(grid, d));
  EXPECT_TRUE((c.values.array() == 0.0).all());

  const GridPtr one = ExplicitGrid(0, {0.0, 1.0});
  const Dataset two = Column({{0.5, 1.0}, {0.7, 3.0}});
  const EffectCurve prod =
      EstimateAle(*Fn(2, [](std::span<const double> r) { return r[0] * r[1]; }), two, MakeBins(one, two));
  EXPECT_NEAR(prod.values(1), 2.0, 1e-15);
}

TEST(EstimateAle, EmptyBinsFlaggedAndAllEmptyThrows) {
  const GridPtr grid = ExplicitGrid(0, {0.0, 1.0, 2.0, 3.0});
  const Dataset d = Column({{0.5, 0.0}, {2.5, 0.0}});
  const ModelPtr m = Fn(2, [](std::span<const double> r) { return r[0] * r[0]; });
  const EffectCurve ale = EstimateAle(*m, d, MakeBins(grid, d));
  EXPECT_EQ(ale.empty_bins, (std::vector<bool>{false, true, false}));
  EXPECT_TRUE(ale.has_empty_bins());
  EXPECT_NEAR(ale.values(2), ale.values(1), 0.0);
  const Dataset none = FromFeatures(FeatureMatrix(0, 2));
  EXPECT_THROW(EstimateAle(*m, none, MakeBins(grid, none)), EstimationError);
}

TEST(EstimateAle, ComplementTermsCancelAndMainEffectRecovered) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  const Dataset d = FromFeatures(SampleFeatures(spec, 300, 6), spec.setting());
  const GridPtr grid = BuildGrid(spec, 0, 40);
  auto h = [](std::span<const double> r) { return r[0] * r[1] + std::sin(r[0]); };
  auto g = [](std::span<const double> r) { return std::exp(r[1]) - r[2] * r[3]; };
  const BinPartition bins = MakeBins(grid, d);
  const Vector a = EstimateAle(*Fn(4, h), d, bins).values;
  const Vector b =
      EstimateAle(*Fn(4, [&](std::span<const double> r) { return h(r) + g(r); }), d, bins).values;
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);

  auto g1 = [](double x) { return x * x * x - 2 * x; };
  const EffectCurve additive =
      EstimateAle(*Fn(4, [&](std::span<const double> r) { return g1(r[0]) + g(r); }), d, bins);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    if (additive.empty_bins.size() > 0 && k > 0 && additive.empty_bins[k - 1]) break;
    EXPECT_NEAR(additive.values(static_cast<Eigen::Index>(k)), g1(grid->points[k]) - g1(grid->points[0]), 1e-10);
  }
}

TEST(CenterCurve, Examples) {
  const GridPtr grid = ExplicitGrid(0, {0.0, 1.0, 2.0, 3.0, 4.0});
  EffectCurve c;
  c.grid = grid;
  c.values = Vector::LinSpaced(5, 0.0, 4.0);
  const EffectCurve centered = CenterCurve(c);
  EXPECT_TRUE(centered.centered);
  EXPECT_NEAR(centered.values(1), -1.0, 1e-15);
  EXPECT_NEAR(centered.values(2), 0.0, 1e-15);
  EXPECT_NEAR(centered.values(3), 1.0, 1e-15);
  EXPECT_LT((CenterCurve(centered).values - centered.values).cwiseAbs().maxCoeff(), 1e-12);
  c.values.setConstant(4.2);
  EXPECT_LT(CenterCurve(c).values.cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_THROW(CenterCurve(c, Vector::Constant(2, 0.5)), DataError);
  EXPECT_THROW(CenterCurve(c, Vector::Constant(3, 0.5)), DataError);
  Vector w(3);
  w << 0.2, 0.5, 0.3;
  c.values << 9, 1, -2, 5, 7;
  const EffectCurve weighted = CenterCurve(c, w);
  EXPECT_NEAR(w.dot(weighted.Evaluated()), 0.0, 1e-12);
}

TEST(GroundTruthEffect, SimpleNormalPdMatchesAnalytic) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  for (const int feature : {0, 1}) {
    const GridPtr grid = BuildGrid(spec, feature, 100);
    const EffectCurve c = EstimateGroundTruthEffect(spec, EffectKind::kPd, grid, 100000, 17);
    const Vector truth = AnalyticEvaluated(spec, EffectKind::kPd, *grid);
    const Vector se = c.EvaluatedStandardErrors();
    const Vector est = c.Evaluated();
    int inside = 0;
    for (Eigen::Index j = 0; j < est.size(); ++j) inside += std::abs(est(j) - truth(j)) <= 3 * se(j);
    EXPECT_GE(inside, static_cast<int>(std::ceil(0.95 * est.size()))) << "feature " << feature;
  }
}

TEST(GroundTruthEffect, DummyFeatureIsZeroAndDeterministic) {
  const DgpSpec spec = DgpSpec::Make(Setting::kFriedman1);
  const GridPtr grid = BuildGrid(spec, 6, 100);
  for (const EffectKind kind : {EffectKind::kPd, EffectKind::kAle}) {
    const EffectCurve c = EstimateGroundTruthEffect(spec, kind, grid, 10000, 4);
    const Vector se = c.EvaluatedStandardErrors();
    const Vector v = c.Evaluated();
    for (Eigen::Index j = 0; j < v.size(); ++j) EXPECT_LE(std::abs(v(j)), 4 * se(j) + 1e-12);
    EXPECT_EQ(c.values, EstimateGroundTruthEffect(spec, kind, grid, 10000, 4).values);
  }
}

TEST(GroundTruthEffect, CenteredStandardErrorsMatchReplication) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  const GridPtr grid = BuildGrid(spec, 1, 20);
  for (const EffectKind kind : {EffectKind::kPd, EffectKind::kAle}) {
    const int reps = 300;
    Eigen::MatrixXd vals(reps, static_cast<Eigen::Index>(grid->evaluated.size()));
    Vector mean_se = Vector::Zero(vals.cols());
    for (int r = 0; r < reps; ++r) {
      const EffectCurve c = EstimateGroundTruthEffect(spec, kind, grid, 2000, 100 + r);
      vals.row(r) = c.Evaluated().transpose();
      mean_se += c.EvaluatedStandardErrors() / reps;
    }
    const Eigen::RowVectorXd mu = vals.colwise().mean();
    const Vector sd = ((vals.rowwise() - mu).array().square().colwise().sum() / (reps - 1)).sqrt().transpose();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
      EXPECT_NEAR(mean_se(j) / sd(j), 1.0, 0.2) << EffectKindName(kind) << " point " << j;
    }
  }
}

TEST(BinnedPopulationAle, LinearAndConstantModels) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  const GridPtr grid = BuildGrid(spec, 0, 12);
  const EffectCurve lin =
      BinnedPopulationAle(spec, *Fn(4, [](std::span<const double> r) { return 3 * r[0] + r[1]; }), grid, 50, 1);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    EXPECT_NEAR(lin.values(static_cast<Eigen::Index>(k)), 3 * (grid->points[k] - grid->points[0]), 1e-12);
  }
  const EffectCurve c = BinnedPopulationAle(spec, *Fn(4, [](std::span<const double>) { return 2.0; }), grid, 50, 1);
  EXPECT_TRUE((c.values.array() == 0.0).all());
}

TEST(BinnedPopulationAle, MatchesExactTruncatedNormalOracle) {
  const DgpSpec spec = DgpSpec::Make(Setting::kSimpleNormalCorrelated);
  const ModelPtr f1 = MakeGroundTruthModel(spec);
  for (const int feature : {0, 1}) {
    const GridPtr grid = BuildGrid(spec, feature, 100);
    const EffectCurve c = BinnedPopulationAle(spec, *f1, grid, 10000, 8 + feature);
    const std::vector<double> exact = ExactBinnedAleF1(*grid);
    for (std::size_t k = 1; k < grid->size(); ++k) {
      const auto ki = static_cast<Eigen::Index>(k);
      EXPECT_NEAR(c.values(ki), exact[k], 3.0 * c.standard_errors(ki) + 1e-12)
          << "feature " << feature << " edge " << k;
    }
  }
}

TEST(BinnedPopulationAle, ZeroProbabilityBinThrows) {
  const DgpSpec spec = DgpSpec::Make(Setting::kFriedman1);
  const GridPtr grid = ExplicitGrid(0, {0.0, 0.5, 1.0, 2.0});
  EXPECT_THROW(BinnedPopulationAle(spec, *MakeGroundTruthModel(spec), grid, 10, 1), EstimationError);
}

TEST(AnalyticEvaluated, CenteredOnGrid) {
  const DgpSpec spec = DgpSpec::Make(Setting::kFriedman1);
  const GridPtr grid = BuildGrid(spec, 0, 100);
  EXPECT_NEAR(AnalyticEvaluated(spec, EffectKind::kAle, *grid).mean(), 0.0, 1e-12);
  EXPECT_LT((AnalyticEvaluated(spec, EffectKind::kAle, *grid) -
             AnalyticEvaluated(spec, EffectKind::kPd, *grid)).cwiseAbs().maxCoeff(), 1e-8);
}

}  // namespace
}  // namespace effektor
