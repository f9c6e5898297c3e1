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

#ifndef EFFEKTOR_LINEAR_MODEL_HPP_
#define EFFEKTOR_LINEAR_MODEL_HPP_

#include <memory>

#include "effektor/dataset.hpp"
#include "effektor/model.hpp"

namespace effektor {

class LinearModel final : public PredictionModel {
 public:
  LinearModel(ModelInfo info, Vector coefficients, double intercept);

  const Vector& coefficients() const { return coefficients_; }
  double intercept() const { return intercept_; }

 protected:
  Vector PredictRows(const FeatureMatrix& x) const override;

 private:
  Vector coefficients_;
  double intercept_;
};

// Ordinary least squares with intercept. Throws FitError when n <= p or the
// design is rank deficient.
std::shared_ptr<const LinearModel> FitLinear(const Dataset& data);

}  // namespace effektor

#endif  // EFFEKTOR_LINEAR_MODEL_HPP_
