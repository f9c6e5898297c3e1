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

#include "effektor/decomp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "effektor/error.hpp"
#include "effektor/random.hpp"

namespace effektor {
namespace {

constexpr Eigen::Index kBoundBlockRows = 2048;
constexpr double kBoundAbsTolerance = 1e-12;

void RequireTruth(const CurveEnsemble& ens) {
  ens.Validate();
  if (ens.M() < 1) throw DataError("ensemble has no curves");
}

// Column-wise sample variance of a matrix whose rows are replicates.
Vector ColumnVariance(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const auto dof = static_cast<double>(x.rows() - 1);
  return ((x.rowwise() - mean).array().square().colwise().sum() / dof).transpose();
}

BoundCheck MakeCheck(Vector lhs, Vector rhs, double slack) {
  BoundCheck check;
  check.satisfied.resize(static_cast<std::size_t>(lhs.size()));
  for (Eigen::Index j = 0; j < lhs.size(); ++j) {
    check.satisfied[static_cast<std::size_t>(j)] =
        lhs(j) <= rhs(j) * (1.0 + slack) + kBoundAbsTolerance;
  }
  check.lhs = std::move(lhs);
  check.rhs = std::move(rhs);
  return check;
}

BoundCheck PdBound(std::span<const ModelPtr> models, const DgpSpec& spec,
                   const EffectGrid& grid, std::size_t n_mc, std::uint64_t seed,
                   double slack) {
  const auto m_count = static_cast<Eigen::Index>(models.size());
  const auto e_count = static_cast<Eigen::Index>(grid.evaluated.size());
  const FeatureMatrix x = SampleFeatures(spec, n_mc, seed);
  std::vector<double> eval_points;
  for (const std::size_t g : grid.evaluated) eval_points.push_back(grid.points[g]);

  Eigen::MatrixXd pd_sum = Eigen::MatrixXd::Zero(m_count, e_count);
  Vector rhs_sum = Vector::Zero(e_count);
  std::vector<Eigen::MatrixXd> ice(models.size());
  FeatureMatrix rows;
  const auto n = static_cast<Eigen::Index>(n_mc);
  for (Eigen::Index start = 0; start < n; start += kBoundBlockRows) {
    const Eigen::Index count = std::min(kBoundBlockRows, n - start);
    rows = x.middleRows(start, count);
    for (Eigen::Index m = 0; m < m_count; ++m) {
      auto& block = ice[static_cast<std::size_t>(m)];
      block.resize(count, e_count);
      models[static_cast<std::size_t>(m)]->PredictIce(rows, grid.feature, eval_points, block);
      pd_sum.row(m) += block.colwise().sum();
    }
    // Across-model variance of every (row, point) entry, summed over rows.
    Eigen::MatrixXd mean = Eigen::MatrixXd::Zero(count, e_count);
    for (const auto& block : ice) mean += block;
    mean /= static_cast<double>(m_count);
    Eigen::MatrixXd ss = Eigen::MatrixXd::Zero(count, e_count);
    for (const auto& block : ice) ss.array() += (block - mean).array().square();
    rhs_sum += ss.colwise().sum().transpose() / static_cast<double>(m_count - 1);
  }
  const auto nd = static_cast<double>(n_mc);
  return MakeCheck(ColumnVariance(pd_sum / nd), rhs_sum / nd, slack);
}

BoundCheck AleBound(std::span<const ModelPtr> models, const DgpSpec& spec,
                    const EffectGrid& grid, std::size_t n_mc, std::uint64_t seed,
                    double slack) {
  const std::size_t num_bins = grid.num_bins();
  const std::size_t per_bin = (n_mc + num_bins - 1) / num_bins;
  const ConditionalDraws draws = SampleConditionalBins(spec, grid, per_bin, seed);
  const auto m_count = static_cast<Eigen::Index>(models.size());
  const Eigen::Index rows = draws.features.rows();

  FeatureMatrix lower = draws.features;
  FeatureMatrix upper = draws.features;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const std::size_t b = draws.assignment[static_cast<std::size_t>(i)];
    lower(i, grid.feature) = grid.points[b];
    upper(i, grid.feature) = grid.points[b + 1];
  }
  Eigen::MatrixXd delta(m_count, rows);
  for (Eigen::Index m = 0; m < m_count; ++m) {
    const auto& model = *models[static_cast<std::size_t>(m)];
    delta.row(m) = (model.Predict(upper) - model.Predict(lower)).transpose();
  }
  // Per-model bin means and the bin average of the across-model variance.
  Eigen::MatrixXd bin_mean = Eigen::MatrixXd::Zero(m_count, static_cast<Eigen::Index>(num_bins));
  Vector bin_var = Vector::Zero(static_cast<Eigen::Index>(num_bins));
  const Vector point_var = ColumnVariance(delta);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto b = static_cast<Eigen::Index>(draws.assignment[static_cast<std::size_t>(i)]);
    bin_mean.col(b) += delta.col(i);
    bin_var(b) += point_var(i);
  }
  for (std::size_t b = 0; b < num_bins; ++b) {
    const auto count = static_cast<double>(draws.counts[b]);
    bin_mean.col(static_cast<Eigen::Index>(b)) /= count;
    bin_var(static_cast<Eigen::Index>(b)) /= count;
  }
  const auto e_count = static_cast<Eigen::Index>(grid.evaluated.size());
  Eigen::MatrixXd ale(m_count, e_count);
  Vector rhs(e_count);
  for (Eigen::Index e = 0; e < e_count; ++e) {
    const std::size_t k = grid.evaluated[static_cast<std::size_t>(e)];
    ale.col(e) = bin_mean.leftCols(static_cast<Eigen::Index>(k)).rowwise().sum();
    rhs(e) = static_cast<double>(k) * bin_var.head(static_cast<Eigen::Index>(k)).sum();
  }
  return MakeCheck(ColumnVariance(ale), rhs, slack);
}

}  // namespace

std::size_t CurveEnsemble::R() const {
  return repeats.empty() ? 0 : static_cast<std::size_t>(repeats.front().rows());
}

void CurveEnsemble::Validate() const {
  if (truth.size() != curves.cols()) {
    throw DataError("truth has " + std::to_string(truth.size()) + " points but curves have " +
                    std::to_string(curves.cols()));
  }
  if (!repeats.empty()) {
    if (repeats.size() != M()) throw DataError("repeat block must have one entry per model");
    for (const auto& block : repeats) {
      if (block.cols() != curves.cols() || block.rows() != repeats.front().rows()) {
        throw DataError("repeat block is misaligned with the grid");
      }
    }
  }
}

Vector MseHat(const CurveEnsemble& ens) {
  RequireTruth(ens);
  return (ens.curves.rowwise() - ens.truth.transpose()).array().square().colwise().mean().transpose();
}

Vector BiasHat(const CurveEnsemble& ens) {
  RequireTruth(ens);
  return ens.truth - ens.curves.colwise().mean().transpose();
}

Vector VarHat(const CurveEnsemble& ens) {
  ens.Validate();
  if (ens.M() < 2) throw DataError("variance needs M >= 2 curves");
  return ColumnVariance(ens.curves);
}

Vector VarEstHat(const CurveEnsemble& ens) {
  ens.Validate();
  if (!ens.has_repeats()) throw DataError("estimation variance needs a repeat block");
  if (ens.R() < 2) throw DataError("estimation variance needs R >= 2 repeats");
  Vector acc = Vector::Zero(ens.curves.cols());
  for (const auto& block : ens.repeats) acc += ColumnVariance(block);
  return acc / static_cast<double>(ens.M());
}

std::size_t VarianceSplit::num_missing() const {
  return static_cast<std::size_t>(std::count(missing.begin(), missing.end(), true));
}

VarianceSplit SplitVariance(const Vector& var_total, const Vector& var_est) {
  if (var_total.size() != var_est.size()) throw DataError("variance vectors are misaligned");
  VarianceSplit split;
  split.var_model.resize(var_total.size());
  split.missing.resize(static_cast<std::size_t>(var_total.size()));
  for (Eigen::Index j = 0; j < var_total.size(); ++j) {
    const double d = var_total(j) - var_est(j);
    const bool missing = !(d >= 0.0);
    split.missing[static_cast<std::size_t>(j)] = missing;
    split.var_model(j) = missing ? std::numeric_limits<double>::quiet_NaN() : d;
  }
  return split;
}

double Aggregate(const Vector& values, bool absolute) {
  if (values.size() == 0) throw DataError("cannot aggregate an empty vector");
  double sum = 0.0;
  std::size_t count = 0;
  for (const double v : values) {
    if (std::isnan(v)) continue;
    sum += absolute ? std::abs(v) : v;
    ++count;
  }
  return count == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(count);
}

ErrorReport Decompose(const CurveEnsemble& ens) {
  ErrorReport report;
  report.meta = ens.meta;
  report.M = ens.M();
  report.R = ens.R();
  report.mse = MseHat(ens);
  report.bias = BiasHat(ens);
  report.var = VarHat(ens);
  report.mse_agg = Aggregate(report.mse);
  report.bias_agg = Aggregate(report.bias, true);
  report.var_agg = Aggregate(report.var);
  if (ens.has_repeats()) {
    report.var_est = VarEstHat(ens);
    VarianceSplit split = SplitVariance(report.var, report.var_est);
    report.var_model = std::move(split.var_model);
    report.var_model_missing = std::move(split.missing);
    report.var_est_agg = Aggregate(report.var_est);
    report.var_model_agg = Aggregate(report.var_model);
  }
  return report;
}

bool BoundCheck::all_satisfied() const {
  return std::all_of(satisfied.begin(), satisfied.end(), [](bool ok) { return ok; });
}

VarianceBoundReport CheckVarianceBounds(std::span<const ModelPtr> models,
                                        const DgpSpec& spec, const GridPtr& grid,
                                        std::size_t n_mc, std::uint64_t seed,
                                        double slack) {
  if (models.size() < 2) throw DataError("variance bounds need at least 2 models");
  if (n_mc == 0) throw DataError("variance bounds need n_mc >= 1");
  VarianceBoundReport report;
  report.pd = PdBound(models, spec, *grid, n_mc, DeriveSeed(seed, {HashTag("pd")}), slack);
  report.ale = AleBound(models, spec, *grid, n_mc, DeriveSeed(seed, {HashTag("ale")}), slack);
  return report;
}

}  // namespace effektor
