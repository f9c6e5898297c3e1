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

#include "effektor/ridge_basis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "effektor/error.hpp"

namespace effektor {
namespace {

// Quantile with linear interpolation between order statistics.
double SortedQuantile(const std::vector<double>& sorted, double prob) {
  const double pos = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

// Univariate truncated-power basis on a standardized feature.
struct UnivariateBasis {
  double shift = 0.0;
  double scale = 1.0;
  int size = 0;
  std::vector<double> knots;

  static UnivariateBasis Build(const Vector& column, int size) {
    UnivariateBasis b;
    b.size = size;
    const auto n = static_cast<double>(column.size());
    b.shift = column.mean();
    const double var =
        n > 1 ? (column.array() - b.shift).square().sum() / (n - 1) : 0.0;
    b.scale = var > 0.0 ? std::sqrt(var) : 1.0;
    const int num_knots = std::max(0, size - 3);
    if (num_knots > 0) {
      std::vector<double> sorted(column.data(), column.data() + column.size());
      std::sort(sorted.begin(), sorted.end());
      for (int k = 1; k <= num_knots; ++k) {
        const double q = SortedQuantile(
            sorted, static_cast<double>(k) / static_cast<double>(num_knots + 1));
        b.knots.push_back((q - b.shift) / b.scale);
      }
    }
    return b;
  }

  void Evaluate(double x, double* out) const {
    const double t = (x - shift) / scale;
    const double powers[3] = {t, t * t, t * t * t};
    const int num_powers = std::min(size, 3);
    for (int k = 0; k < num_powers; ++k) out[k] = powers[k];
    for (std::size_t k = 0; k < knots.size(); ++k) {
      const double d = std::max(t - knots[k], 0.0);
      out[3 + k] = d * d * d;
    }
  }
};

class RidgeBasisModel final : public PredictionModel {
 public:
  RidgeBasisModel(int p, ModelInfo info, std::vector<UnivariateBasis> main,
                  std::vector<UnivariateBasis> inter,
                  std::vector<std::pair<int, int>> pairs)
      : PredictionModel(p, std::move(info)),
        main_(std::move(main)),
        inter_(std::move(inter)),
        pairs_(std::move(pairs)) {
    num_columns_ = 0;
    for (const auto& b : main_) num_columns_ += b.size;
    for (const auto& [a, c] : pairs_) {
      num_columns_ += inter_[static_cast<std::size_t>(a)].size *
                      inter_[static_cast<std::size_t>(c)].size;
    }
  }

  int num_columns() const { return num_columns_; }

  // Raw (unstandardized) basis expansion of every row.
  Eigen::MatrixXd Expand(const FeatureMatrix& x) const {
    Eigen::MatrixXd design(x.rows(), num_columns_);
    std::vector<double> row(static_cast<std::size_t>(num_columns_));
    std::vector<double> ua;
    std::vector<double> ub;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      int col = 0;
      for (std::size_t j = 0; j < main_.size(); ++j) {
        main_[j].Evaluate(x(i, static_cast<Eigen::Index>(j)), row.data() + col);
        col += main_[j].size;
      }
      for (const auto& [a, c] : pairs_) {
        const auto& ba = inter_[static_cast<std::size_t>(a)];
        const auto& bc = inter_[static_cast<std::size_t>(c)];
        ua.resize(static_cast<std::size_t>(ba.size));
        ub.resize(static_cast<std::size_t>(bc.size));
        ba.Evaluate(x(i, a), ua.data());
        bc.Evaluate(x(i, c), ub.data());
        for (const double va : ua) {
          for (const double vb : ub) row[static_cast<std::size_t>(col++)] = va * vb;
        }
      }
      for (int k = 0; k < num_columns_; ++k) {
        design(i, k) = row[static_cast<std::size_t>(k)];
      }
    }
    return design;
  }

  void SetSolution(Eigen::VectorXd means, Eigen::VectorXd scales,
                   Eigen::VectorXd coef, double intercept) {
    means_ = std::move(means);
    scales_ = std::move(scales);
    // Fold standardization into the coefficients once.
    coef_ = coef.cwiseQuotient(scales_);
    intercept_ = intercept - coef_.dot(means_);
  }

 protected:
  Vector PredictRows(const FeatureMatrix& x) const override {
    const Eigen::MatrixXd design = Expand(x);
    return (design * coef_).array() + intercept_;
  }

 private:
  std::vector<UnivariateBasis> main_;
  std::vector<UnivariateBasis> inter_;
  std::vector<std::pair<int, int>> pairs_;
  int num_columns_ = 0;
  Eigen::VectorXd means_;
  Eigen::VectorXd scales_;
  Eigen::VectorXd coef_;
  double intercept_ = 0.0;
};

}  // namespace

void RidgeBasisParams::Validate() const {
  if (basis_size < 1) throw ConfigError("ridge basis_size must be >= 1");
  if (interaction_basis_size < 1) {
    throw ConfigError("ridge interaction_basis_size must be >= 1");
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("ridge penalty lambda must be positive");
  }
  for (const auto& [a, b] : interaction_pairs) {
    if (a < 0 || b < 0 || a == b) {
      throw ConfigError("invalid interaction pair");
    }
  }
}

ModelPtr FitRidgeBasis(const Dataset& data, const RidgeBasisParams& params,
                       ModelInfo info) {
  params.Validate();
  data.Validate();
  if (data.n() < 2) throw FitError("ridge basis fit needs at least 2 rows");
  const int p = data.p();
  std::vector<std::pair<int, int>> pairs;
  if (params.interactions) {
    for (const auto& [a, b] : params.interaction_pairs) {
      if (a >= p || b >= p) throw ConfigError("interaction pair out of range");
      pairs.emplace_back(a, b);
    }
  }
  std::vector<UnivariateBasis> main;
  std::vector<UnivariateBasis> inter(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) {
    const Vector column = data.features.col(j);
    main.push_back(UnivariateBasis::Build(column, params.basis_size));
  }
  for (const auto& [a, b] : pairs) {
    for (const int j : {a, b}) {
      if (inter[static_cast<std::size_t>(j)].size == 0) {
        inter[static_cast<std::size_t>(j)] = UnivariateBasis::Build(
            data.features.col(j), params.interaction_basis_size);
      }
    }
  }
  info.kind = ModelKind::kRidgeBasis;
  auto model = std::make_shared<RidgeBasisModel>(p, std::move(info),
                                                 std::move(main),
                                                 std::move(inter), pairs);

  Eigen::MatrixXd design = model->Expand(data.features);
  const auto n = static_cast<double>(data.n());
  const Eigen::VectorXd means = design.colwise().mean();
  design.rowwise() -= means.transpose();
  Eigen::VectorXd scales =
      (design.colwise().squaredNorm() / n).array().sqrt().matrix();
  for (Eigen::Index k = 0; k < scales.size(); ++k) {
    if (!(scales(k) > 1e-12)) scales(k) = 1.0;
  }
  design = design * scales.cwiseInverse().asDiagonal();

  const double y_mean = data.target.mean();
  Eigen::MatrixXd gram = design.transpose() * design;
  gram.diagonal().array() += params.lambda;
  const Eigen::VectorXd rhs =
      design.transpose() * (data.target.array() - y_mean).matrix();
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e-14)) {
    throw FitError("ridge system is numerically singular (lambda=" +
                   std::to_string(params.lambda) + ")");
  }
  const Eigen::VectorXd coef = llt.solve(rhs);
  if (!coef.allFinite()) throw FitError("ridge solution is not finite");
  model->SetSolution(means, scales, coef, y_mean);
  return model;
}

}  // namespace effektor
