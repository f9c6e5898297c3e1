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

#include "effektor/linear_model.hpp"

#include <string>

#include "effektor/error.hpp"

namespace effektor {

LinearModel::LinearModel(ModelInfo info, Vector coefficients, double intercept)
    : PredictionModel(static_cast<int>(coefficients.size()), std::move(info)),
      coefficients_(std::move(coefficients)),
      intercept_(intercept) {}

Vector LinearModel::PredictRows(const FeatureMatrix& x) const {
  return (x * coefficients_).array() + intercept_;
}

std::shared_ptr<const LinearModel> FitLinear(const Dataset& data) {
  data.Validate();
  const auto n = static_cast<Eigen::Index>(data.n());
  const Eigen::Index p = data.p();
  if (n <= p) {
    throw FitError("linear regression needs n > p (n=" + std::to_string(n) +
                   ", p=" + std::to_string(p) + ")");
  }
  Eigen::MatrixXd design(n, p + 1);
  design.col(0).setOnes();
  design.rightCols(p) = data.features;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p + 1) throw FitError("linear design is rank deficient");
  const Eigen::VectorXd beta = qr.solve(data.target);
  ModelInfo info;
  info.kind = ModelKind::kLinear;
  info.learner_id = "Linear";
  return std::make_shared<LinearModel>(std::move(info), beta.tail(p), beta(0));
}

}  // namespace effektor
