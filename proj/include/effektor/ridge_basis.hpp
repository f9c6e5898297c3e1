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

#ifndef EFFEKTOR_RIDGE_BASIS_HPP_
#define EFFEKTOR_RIDGE_BASIS_HPP_

#include <utility>
#include <vector>

#include "effektor/dataset.hpp"
#include "effektor/model.hpp"

namespace effektor {

struct RidgeBasisParams {
  // Univariate columns per feature: x, x^2, x^3, then truncated cubics
  // (x - knot)_+^3 on marginal-quantile knots.
  int basis_size = 10;
  bool interactions = true;
  // Univariate columns per feature entering each pairwise tensor product.
  int interaction_basis_size = 4;
  std::vector<std::pair<int, int>> interaction_pairs;
  double lambda = 1.0;

  void Validate() const;
};

// Penalized least squares on a spline-like basis expansion. Columns are
// standardized before the ridge penalty is applied; the intercept is not
// penalized. Throws DataError on non-finite data and FitError when the
// penalized normal equations are numerically singular.
ModelPtr FitRidgeBasis(const Dataset& data, const RidgeBasisParams& params,
                       ModelInfo info);

}  // namespace effektor

#endif  // EFFEKTOR_RIDGE_BASIS_HPP_
