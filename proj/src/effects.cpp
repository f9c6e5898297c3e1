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

#include "effektor/effects.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "effektor/error.hpp"
#include "effektor/random.hpp"

namespace effektor {
namespace {

constexpr Eigen::Index kPdBlockPredictions = 8192;

// Running mean and sum of squared deviations.
struct Welford {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t count = 0;

  void Add(double v) {
    ++count;
    const double delta = v - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (v - mean);
  }
  double SampleVariance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }
};

void CheckDataMatchesGrid(const Dataset& data, const EffectGrid& grid) {
  if (grid.feature < 0 || grid.feature >= data.p()) {
    throw DataError("grid feature " + std::to_string(grid.feature) +
                    " out of range for data with " + std::to_string(data.p()) +
                    " features");
  }
}

// Builds an uncentered ALE curve from per-bin mean finite differences and the
// variances of those means.
EffectCurve AccumulateAle(const GridPtr& grid, const std::vector<double>& bin_mean,
                          const std::vector<double>& bin_mean_var,
                          const std::vector<std::size_t>& counts,
                          std::size_t n_used) {
  const std::size_t num_bins = grid->num_bins();
  const std::size_t g_count = grid->size();
  EffectCurve curve;
  curve.feature = grid->feature;
  curve.kind = EffectKind::kAle;
  curve.grid = grid;
  curve.n_used = n_used;
  curve.bin_counts = counts;
  curve.empty_bins.resize(num_bins);
  curve.values.setZero(static_cast<Eigen::Index>(g_count));
  curve.standard_errors.setZero(static_cast<Eigen::Index>(g_count));
  double acc = 0.0;
  double acc_var = 0.0;
  for (std::size_t b = 0; b < num_bins; ++b) {
    curve.empty_bins[b] = counts[b] == 0;
    acc += bin_mean[b];
    acc_var += bin_mean_var[b];
    curve.values(static_cast<Eigen::Index>(b + 1)) = acc;
    curve.standard_errors(static_cast<Eigen::Index>(b + 1)) = std::sqrt(acc_var);
  }
  // Centering mixes bins: c_k = sum_b (1[b < k] - frac_b) D_b with frac_b the
  // share of evaluated edges lying above bin b.
  const auto& evaluated = grid->evaluated;
  curve.centered_standard_errors.setZero(static_cast<Eigen::Index>(g_count));
  if (!evaluated.empty()) {
    std::vector<double> frac(num_bins, 0.0);
    for (const std::size_t j : evaluated) {
      for (std::size_t b = 0; b < std::min(j, num_bins); ++b) frac[b] += 1.0;
    }
    for (double& f : frac) f /= static_cast<double>(evaluated.size());
    for (std::size_t k = 0; k < g_count; ++k) {
      double var = 0.0;
      for (std::size_t b = 0; b < num_bins; ++b) {
        const double w = (b < k ? 1.0 : 0.0) - frac[b];
        var += w * w * bin_mean_var[b];
      }
      curve.centered_standard_errors(static_cast<Eigen::Index>(k)) = std::sqrt(var);
    }
  }
  return curve;
}

// Per-bin mean and mean-variance of finite differences over the given rows.
void BinFiniteDifferences(const PredictionModel& model, const FeatureMatrix& x,
                          const std::vector<std::size_t>& assignment,
                          const EffectGrid& grid, std::vector<double>& bin_mean,
                          std::vector<double>& bin_mean_var) {
  const std::size_t num_bins = grid.num_bins();
  FeatureMatrix lower = x;
  FeatureMatrix upper = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const std::size_t b = assignment[static_cast<std::size_t>(i)];
    lower(i, grid.feature) = grid.points[b];
    upper(i, grid.feature) = grid.points[b + 1];
  }
  const Vector hi = model.Predict(upper);
  const Vector lo = model.Predict(lower);
  std::vector<Welford> stats(num_bins);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    stats[assignment[static_cast<std::size_t>(i)]].Add(hi(i) - lo(i));
  }
  bin_mean.assign(num_bins, 0.0);
  bin_mean_var.assign(num_bins, 0.0);
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (stats[b].count == 0) continue;
    bin_mean[b] = stats[b].mean;
    bin_mean_var[b] = stats[b].SampleVariance() / static_cast<double>(stats[b].count);
  }
}

GridPtr FinishGrid(EffectGrid grid) {
  for (std::size_t g = 1; g + 1 < grid.points.size(); ++g) grid.evaluated.push_back(g);
  return std::make_shared<const EffectGrid>(std::move(grid));
}

}  // namespace

std::string_view EffectKindName(EffectKind kind) {
  return kind == EffectKind::kPd ? "PD" : "ALE";
}

EffectKind ParseEffectKind(std::string_view name) {
  if (name == "pd" || name == "PD") return EffectKind::kPd;
  if (name == "ale" || name == "ALE") return EffectKind::kAle;
  throw ConfigError("unknown effect kind '" + std::string(name) + "'");
}

bool EffectCurve::has_empty_bins() const {
  return std::find(empty_bins.begin(), empty_bins.end(), true) != empty_bins.end();
}

Vector EffectCurve::Evaluated() const {
  Vector out(static_cast<Eigen::Index>(grid->evaluated.size()));
  for (std::size_t e = 0; e < grid->evaluated.size(); ++e) {
    out(static_cast<Eigen::Index>(e)) =
        values(static_cast<Eigen::Index>(grid->evaluated[e]));
  }
  return out;
}

Vector EffectCurve::EvaluatedStandardErrors() const {
  if (standard_errors.size() == 0) return Vector();
  Vector out(static_cast<Eigen::Index>(grid->evaluated.size()));
  for (std::size_t e = 0; e < grid->evaluated.size(); ++e) {
    out(static_cast<Eigen::Index>(e)) =
        standard_errors(static_cast<Eigen::Index>(grid->evaluated[e]));
  }
  return out;
}

GridPtr BuildGrid(const DgpSpec& spec, int feature, std::size_t num_points) {
  if (num_points < 3) throw DomainError("grid needs at least 3 points");
  EffectGrid grid;
  grid.feature = feature;
  grid.source = EffectGrid::Source::kTheoreticalQuantile;
  grid.points.reserve(num_points);
  for (std::size_t g = 0; g < num_points; ++g) {
    const double prob = (static_cast<double>(g) + 0.5) / static_cast<double>(num_points);
    grid.points.push_back(TheoreticalQuantile(spec, feature, prob));
  }
  for (std::size_t g = 1; g < num_points; ++g) {
    if (!(grid.points[g] > grid.points[g - 1])) {
      throw DomainError("theoretical quantile grid is not strictly increasing");
    }
  }
  return FinishGrid(std::move(grid));
}

GridPtr ExplicitGrid(int feature, std::vector<double> points) {
  if (points.size() < 2) throw DomainError("grid needs at least 2 points");
  for (std::size_t g = 1; g < points.size(); ++g) {
    if (!(points[g] > points[g - 1])) {
      throw DomainError("grid points must be strictly increasing");
    }
  }
  EffectGrid grid;
  grid.feature = feature;
  grid.source = EffectGrid::Source::kExplicit;
  grid.points = std::move(points);
  return FinishGrid(std::move(grid));
}

std::size_t BinIndex(std::span<const double> edges, double x) {
  const std::size_t num_bins = edges.size() - 1;
  const auto first_ge = static_cast<std::size_t>(
      std::lower_bound(edges.begin(), edges.end(), x) - edges.begin());
  if (first_ge == 0) return 0;
  return std::min(first_ge - 1, num_bins - 1);
}

Eigen::MatrixXd EstimateIce(const PredictionModel& model, const Dataset& data,
                            const EffectGrid& grid) {
  CheckDataMatchesGrid(data, grid);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(data.n()),
                      static_cast<Eigen::Index>(grid.size()));
  model.PredictIce(data.features, grid.feature, grid.points, out);
  return out;
}

EffectCurve EstimatePd(const PredictionModel& model, const Dataset& data,
                       const GridPtr& grid) {
  CheckDataMatchesGrid(data, *grid);
  if (data.n() == 0) throw EstimationError("PD needs at least one sample");
  const auto g_count = static_cast<Eigen::Index>(grid->size());
  const Eigen::Index block = std::max<Eigen::Index>(1, kPdBlockPredictions / g_count);
  const auto& evaluated = grid->evaluated;
  std::vector<Welford> raw(static_cast<std::size_t>(g_count));
  std::vector<Welford> centered(static_cast<std::size_t>(g_count));
  FeatureMatrix rows;
  Eigen::MatrixXd ice;
  const auto n = static_cast<Eigen::Index>(data.n());
  for (Eigen::Index start = 0; start < n; start += block) {
    const Eigen::Index count = std::min(block, n - start);
    rows = data.features.middleRows(start, count);
    ice.resize(count, g_count);
    model.PredictIce(rows, grid->feature, grid->points, ice);
    for (Eigen::Index i = 0; i < count; ++i) {
      double row_mean = 0.0;
      for (const std::size_t e : evaluated) row_mean += ice(i, static_cast<Eigen::Index>(e));
      if (!evaluated.empty()) row_mean /= static_cast<double>(evaluated.size());
      for (Eigen::Index g = 0; g < g_count; ++g) {
        raw[static_cast<std::size_t>(g)].Add(ice(i, g));
        centered[static_cast<std::size_t>(g)].Add(ice(i, g) - row_mean);
      }
    }
  }
  EffectCurve curve;
  curve.feature = grid->feature;
  curve.kind = EffectKind::kPd;
  curve.grid = grid;
  curve.n_used = data.n();
  curve.values.resize(g_count);
  curve.standard_errors.resize(g_count);
  curve.centered_standard_errors.resize(g_count);
  const auto nd = static_cast<double>(data.n());
  for (Eigen::Index g = 0; g < g_count; ++g) {
    const auto gi = static_cast<std::size_t>(g);
    curve.values(g) = raw[gi].mean;
    curve.standard_errors(g) = std::sqrt(raw[gi].SampleVariance() / nd);
    curve.centered_standard_errors(g) = std::sqrt(centered[gi].SampleVariance() / nd);
  }
  return curve;
}

BinPartition MakeBins(const GridPtr& grid, const Dataset& data) {
  CheckDataMatchesGrid(data, *grid);
  if (grid->size() < 2) throw DomainError("bins need a grid of >= 2 points");
  BinPartition bins;
  bins.grid = grid;
  bins.counts.assign(grid->num_bins(), 0);
  bins.assignment.resize(data.n());
  for (std::size_t i = 0; i < data.n(); ++i) {
    const std::size_t b =
        BinIndex(grid->points, data.features(static_cast<Eigen::Index>(i), grid->feature));
    bins.assignment[i] = b;
    ++bins.counts[b];
  }
  return bins;
}

EffectCurve EstimateAle(const PredictionModel& model, const Dataset& data,
                        const BinPartition& bins) {
  CheckDataMatchesGrid(data, *bins.grid);
  if (bins.assignment.size() != data.n()) {
    throw DataError("bin partition was built for a different dataset");
  }
  if (data.n() == 0) throw EstimationError("ALE needs at least one sample: all bins empty");
  std::vector<double> bin_mean;
  std::vector<double> bin_mean_var;
  BinFiniteDifferences(model, data.features, bins.assignment, *bins.grid, bin_mean,
                       bin_mean_var);
  return AccumulateAle(bins.grid, bin_mean, bin_mean_var, bins.counts, data.n());
}

EffectCurve EstimateEffect(const PredictionModel& model, const Dataset& data,
                           EffectKind kind, const GridPtr& grid) {
  if (kind == EffectKind::kPd) return EstimatePd(model, data, grid);
  return EstimateAle(model, data, MakeBins(grid, data));
}

Vector DefaultCenteringWeights(const EffectCurve& curve) {
  const auto count = static_cast<Eigen::Index>(curve.grid->evaluated.size());
  if (count == 0) return Vector();
  return Vector::Constant(count, 1.0 / static_cast<double>(count));
}

EffectCurve CenterCurve(const EffectCurve& curve, const Vector& weights) {
  const auto& evaluated = curve.grid->evaluated;
  if (weights.size() != static_cast<Eigen::Index>(evaluated.size())) {
    throw DataError("centering weights have length " + std::to_string(weights.size()) +
                    ", expected " + std::to_string(evaluated.size()));
  }
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw DataError("centering weights must be nonnegative and sum to 1");
  }
  double offset = 0.0;
  for (std::size_t e = 0; e < evaluated.size(); ++e) {
    offset += weights(static_cast<Eigen::Index>(e)) *
              curve.values(static_cast<Eigen::Index>(evaluated[e]));
  }
  EffectCurve out = curve;
  out.values.array() -= offset;
  out.centered = true;
  const Vector uniform = DefaultCenteringWeights(curve);
  if ((weights - uniform).cwiseAbs().maxCoeff() <= 1e-15) {
    out.standard_errors = curve.centered_standard_errors;
  } else {
    out.standard_errors.resize(0);
  }
  return out;
}

EffectCurve CenterCurve(const EffectCurve& curve) {
  return CenterCurve(curve, DefaultCenteringWeights(curve));
}

EffectCurve EstimateGroundTruthEffect(const DgpSpec& spec, EffectKind kind,
                                      const GridPtr& grid, std::size_t n_gt,
                                      std::uint64_t seed) {
  if (n_gt == 0) throw DataError("ground-truth effect needs n_gt >= 1");
  const ModelPtr truth = MakeGroundTruthModel(spec);
  Dataset data;
  data.setting = spec.setting();
  data.seed = seed;
  data.features = SampleFeatures(spec, n_gt, seed);
  data.target = Vector::Zero(data.features.rows());
  return CenterCurve(EstimateEffect(*truth, data, kind, grid));
}

Vector AnalyticEvaluated(const DgpSpec& spec, EffectKind kind, const EffectGrid& grid) {
  Vector out(static_cast<Eigen::Index>(grid.evaluated.size()));
  for (std::size_t e = 0; e < grid.evaluated.size(); ++e) {
    const double x = grid.points[grid.evaluated[e]];
    out(static_cast<Eigen::Index>(e)) = kind == EffectKind::kPd
                                            ? AnalyticPd(spec, grid.feature, x, false)
                                            : AnalyticAle(spec, grid.feature, x, false);
  }
  if (out.size() > 0) out.array() -= out.mean();
  return out;
}

ConditionalDraws SampleConditionalBins(const DgpSpec& spec, const EffectGrid& grid,
                                       std::size_t n_per_bin, std::uint64_t seed) {
  if (n_per_bin == 0) throw DataError("conditional sampling needs n_per_bin >= 1");
  if (grid.size() < 2) throw DomainError("bins need a grid of >= 2 points");
  const std::size_t num_bins = grid.num_bins();
  const std::size_t budget = 200 * n_per_bin * num_bins;
  const std::size_t batch =
      std::min<std::size_t>(std::max<std::size_t>(n_per_bin * num_bins, 1000), 1u << 20);
  const auto p = static_cast<Eigen::Index>(spec.p());

  ConditionalDraws out;
  out.counts.assign(num_bins, 0);
  FeatureMatrix accepted(static_cast<Eigen::Index>(n_per_bin * num_bins), p);
  out.assignment.reserve(n_per_bin * num_bins);
  std::size_t filled_bins = 0;
  std::size_t drawn = 0;
  for (std::uint64_t round = 0; filled_bins < num_bins && drawn < budget; ++round) {
    const FeatureMatrix x = SampleFeatures(spec, batch, DeriveSeed(seed, {round}));
    drawn += batch;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const std::size_t b = BinIndex(grid.points, x(i, grid.feature));
      if (out.counts[b] >= n_per_bin) continue;
      accepted.row(static_cast<Eigen::Index>(out.assignment.size())) = x.row(i);
      out.assignment.push_back(b);
      if (++out.counts[b] == n_per_bin) ++filled_bins;
    }
  }
  for (std::size_t b = 0; b < num_bins; ++b) {
    if (out.counts[b] == 0) {
      throw EstimationError("bin " + std::to_string(b) +
                            " received no conditional draws; its probability is "
                            "zero or below the sampling budget");
    }
  }
  out.features = accepted.topRows(static_cast<Eigen::Index>(out.assignment.size()));
  return out;
}

EffectCurve BinnedPopulationAle(const DgpSpec& spec,
                                const PredictionModel& model,
                                const GridPtr& grid, std::size_t n_mc,
                                std::uint64_t seed) {
  const ConditionalDraws draws = SampleConditionalBins(spec, *grid, n_mc, seed);
  std::vector<double> bin_mean;
  std::vector<double> bin_mean_var;
  BinFiniteDifferences(model, draws.features, draws.assignment, *grid, bin_mean,
                       bin_mean_var);
  return AccumulateAle(grid, bin_mean, bin_mean_var, draws.counts, draws.assignment.size());
}

}  // namespace effektor
