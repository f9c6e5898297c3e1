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

#ifndef EFFEKTOR_EFFECTS_HPP_
#define EFFEKTOR_EFFECTS_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "effektor/dataset.hpp"
#include "effektor/dgp.hpp"
#include "effektor/model.hpp"

namespace effektor {

enum class EffectKind { kPd, kAle };

std::string_view EffectKindName(EffectKind kind);  // "PD" / "ALE"
// Accepts "pd", "PD", "ale", "ALE".
EffectKind ParseEffectKind(std::string_view name);

// Shared evaluation grid of one feature. For ALE the grid points double as
// the K = G - 1 bin edges z_0 < ... < z_K.
struct EffectGrid {
  enum class Source { kTheoreticalQuantile, kExplicit };

  int feature = 0;
  std::vector<double> points;
  // Indices of reported points: every point except the first and the last.
  std::vector<std::size_t> evaluated;
  Source source = Source::kExplicit;

  std::size_t size() const { return points.size(); }
  std::size_t num_bins() const { return points.empty() ? 0 : points.size() - 1; }
};

using GridPtr = std::shared_ptr<const EffectGrid>;

// points[g] = quantile of the feature marginal at (g + 1/2) / G. Throws
// DomainError for G < 3.
GridPtr BuildGrid(const DgpSpec& spec, int feature, std::size_t num_points);

// Grid from explicit strictly increasing points (at least 2). Throws
// DomainError otherwise.
GridPtr ExplicitGrid(int feature, std::vector<double> points);

// Feature effect on a grid. `values` has one entry per grid point; for ALE the
// entry at z_0 is the accumulation origin (0 before centering). Reported
// values are the `evaluated` subset.
struct EffectCurve {
  int feature = 0;
  EffectKind kind = EffectKind::kPd;
  bool centered = false;
  GridPtr grid;
  Vector values;
  // Pointwise Monte Carlo standard errors of `values`; empty when unknown.
  Vector standard_errors;
  // Standard errors of the values after centering with the default weights.
  Vector centered_standard_errors;
  std::size_t n_used = 0;
  // ALE diagnostics, one entry per bin.
  std::vector<std::size_t> bin_counts;
  std::vector<bool> empty_bins;

  bool has_empty_bins() const;
  Vector Evaluated() const;
  Vector EvaluatedStandardErrors() const;
};

// Assignment of samples to the bins (z_{k-1}, z_k] spanned by the grid.
// Samples at or below z_0 fall into the first bin and samples above z_K into
// the last one.
struct BinPartition {
  GridPtr grid;
  std::vector<std::size_t> counts;
  std::vector<std::size_t> assignment;

  std::span<const double> edges() const { return grid->points; }
  std::size_t num_bins() const { return counts.size(); }
};

// 0-based bin index of x under the clamping rule.
std::size_t BinIndex(std::span<const double> edges, double x);

// n x G matrix of ICE values: entry (i, g) = f(grid[g], complement of row i).
Eigen::MatrixXd EstimateIce(const PredictionModel& model, const Dataset& data,
                            const EffectGrid& grid);

// Uncentered partial dependence: column means of the ICE matrix, streamed in
// row blocks.
EffectCurve EstimatePd(const PredictionModel& model, const Dataset& data,
                       const GridPtr& grid);

BinPartition MakeBins(const GridPtr& grid, const Dataset& data);

// Uncentered ALE at every edge. Empty bins contribute 0 and are flagged.
// Throws EstimationError when no bin holds a sample.
EffectCurve EstimateAle(const PredictionModel& model, const Dataset& data,
                        const BinPartition& bins);

// Uncentered PD or ALE on the grid.
EffectCurve EstimateEffect(const PredictionModel& model, const Dataset& data,
                           EffectKind kind, const GridPtr& grid);

// Uniform weights over the evaluated points. For the equal-probability grid
// this discretizes the marginal measure for PD and the equal bin
// probabilities for ALE.
Vector DefaultCenteringWeights(const EffectCurve& curve);

// Subtracts the weighted mean of the evaluated values from every value.
// Weights must be nonnegative, sum to 1 and match the evaluated count;
// DataError otherwise.
EffectCurve CenterCurve(const EffectCurve& curve, const Vector& weights);
EffectCurve CenterCurve(const EffectCurve& curve);

// Centered effect of the setting's f estimated on n_gt fresh samples.
EffectCurve EstimateGroundTruthEffect(const DgpSpec& spec, EffectKind kind,
                                      const GridPtr& grid, std::size_t n_gt,
                                      std::uint64_t seed);

// Closed-form effect at the evaluated points, centered with the same uniform
// grid weights as estimated curves. Throws UnsupportedError where no closed
// form exists.
Vector AnalyticEvaluated(const DgpSpec& spec, EffectKind kind, const EffectGrid& grid);

// Up to n_per_bin draws of X conditional on the feature falling in each bin,
// by rejection from the joint distribution. Throws EstimationError when a bin
// receives no draw within the sampling budget.
struct ConditionalDraws {
  FeatureMatrix features;
  std::vector<std::size_t> assignment;
  std::vector<std::size_t> counts;
};

ConditionalDraws SampleConditionalBins(const DgpSpec& spec, const EffectGrid& grid,
                                       std::size_t n_per_bin, std::uint64_t seed);


// Monte Carlo approximation of the population binned uncentered ALE of
// `model`: n_mc draws from the joint law conditional on each bin (same
// clamping rule as the estimator), obtained by rejection. Throws
// EstimationError when a bin receives no draws within the sampling budget.
EffectCurve BinnedPopulationAle(const DgpSpec& spec,
                                const PredictionModel& model,
                                const GridPtr& grid, std::size_t n_mc,
                                std::uint64_t seed);

}  // namespace effektor

#endif  // EFFEKTOR_EFFECTS_HPP_
