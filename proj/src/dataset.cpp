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

#include "effektor/dataset.hpp"

#include <cmath>
#include <string>

#include "effektor/error.hpp"

namespace effektor {

Dataset Dataset::Subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.setting = setting;
  out.seed = seed;
  out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  out.target.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n()) {
      throw DataError("row index " + std::to_string(rows[i]) +
                      " out of range for dataset of " + std::to_string(n()) +
                      " rows");
    }
    const auto r = static_cast<Eigen::Index>(rows[i]);
    out.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
    out.target(static_cast<Eigen::Index>(i)) = target(r);
  }
  return out;
}

void Dataset::Validate() const {
  if (target.size() != features.rows()) {
    throw DataError("target length " + std::to_string(target.size()) +
                    " differs from row count " +
                    std::to_string(features.rows()));
  }
  if (!features.allFinite() || !target.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
}

}  // namespace effektor
