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


#ifndef EFFEKTOR_DECOMP_HPP_
#define EFFEKTOR_DECOMP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "effektor/dataset.hpp"
#include "effektor/dgp.hpp"
#include "effektor/effects.hpp"
#include "effektor/model.hpp"

namespace effektor {

struct CurveMetadata {
  std::string setting;
  std::string learner;
  std::string strategy;
  int feature = 0;
  EffectKind kind = EffectKind::kPd;
  std::size_t n = 0;
};

// Centered curves of M repetitions on the evaluated grid points.
struct CurveEnsemble {
  Eigen::MatrixXd curves;  // M x G'
  // Optional: repeats[m] is R x G', the curves of model m on R fresh datasets.
  std::vector<Eigen::MatrixXd> repeats;
  Vector truth;  // G'
  CurveMetadata meta;

  std::size_t M() const { return static_cast<std::size_t>(curves.rows()); }
  std::size_t G() const { return static_cast<std::size_t>(curves.cols()); }
  std::size_t R() const;  // 0 without a repeat block
  bool has_repeats() const { return !repeats.empty(); }

  // Throws DataError on misaligned shapes.
  void Validate() const;
};

// (1/M) sum_m (truth - curve_m)^2
Vector MseHat(const CurveEnsemble& ens);
// truth - mean_m curve_m
Vector BiasHat(const CurveEnsemble& ens);
// Sample variance across repetitions (divisor M - 1). Throws DataError if M < 2.
Vector VarHat(const CurveEnsemble& ens);
// (1 / (M (R - 1))) sum_m sum_r (curve_mr - mean_r curve_mr)^2. Throws
// DataError without a repeat block or with R < 2.
Vector VarEstHat(const CurveEnsemble& ens);

struct VarianceSplit {
  Vector var_model;  // NaN where missing
  std::vector<bool> missing;

  std::size_t num_missing() const;
};

// var_total - var_est, reported missing where negative.
VarianceSplit SplitVariance(const Vector& var_total, const Vector& var_est);

// Mean over the points, skipping NaN entries; NaN if nothing remains.
// With `absolute`, averages |v|. Throws DataError on an empty vector.
double Aggregate(const Vector& values, bool absolute = false);

struct ErrorReport {
  CurveMetadata meta;
  std::size_t M = 0;
  std::size_t R = 0;
  Vector mse;
  Vector bias;
  Vector var;
  Vector var_est;    // empty without repeats
  Vector var_model;  // empty without repeats
  std::vector<bool> var_model_missing;

  double mse_agg = 0.0;
  double bias_agg = 0.0;  // mean |bias|
  double var_agg = 0.0;
  double var_est_agg = 0.0;
  double var_model_agg = 0.0;
};

ErrorReport Decompose(const CurveEnsemble& ens);

// Both sides of a Jensen-type variance bound at each evaluated point.
struct BoundCheck {
  Vector lhs;
  Vector rhs;
  std::vector<bool> satisfied;

  bool all_satisfied() const;
};

struct VarianceBoundReport {
  BoundCheck pd;
  BoundCheck ale;
};

// Monte Carlo check of
//   PD:  Var_m PD_m(x) <= E_X Var_m f_m(x, X_C)
//   ALE: Var_m ALE_m(z_k) <= k * sum_{b<=k} E[Var_m Delta_m(b, X_C) | bin b]
// with uncentered PD and binned ALE. PD uses n_mc joint draws; ALE uses
// ceil(n_mc / K) conditional draws per bin. Both sides share the draws and
// the divisor M - 1. A point passes when lhs <= rhs * (1 + slack) + 1e-12.
// Throws DataError with fewer than 2 models.
VarianceBoundReport CheckVarianceBounds(std::span<const ModelPtr> models,
                                        const DgpSpec& spec, const GridPtr& grid,
                                        std::size_t n_mc, std::uint64_t seed,
                                        double slack = 0.05);

}  // namespace effektor

#endif  // EFFEKTOR_DECOMP_HPP_
