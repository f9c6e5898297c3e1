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

#ifndef EFFEKTOR_DATASET_HPP_
#define EFFEKTOR_DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace effektor {

// Row-major so that a single observation is contiguous.
using FeatureMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

enum class Setting { kSimpleNormalCorrelated, kFriedman1, kFeynman12916 };

// n observations of p features plus a target.
struct Dataset {
  FeatureMatrix features;
  Vector target;
  Setting setting = Setting::kSimpleNormalCorrelated;
  std::uint64_t seed = 0;

  std::size_t n() const { return static_cast<std::size_t>(features.rows()); }
  int p() const { return static_cast<int>(features.cols()); }

  // Copies the given rows, in order. Throws DataError on out-of-range rows.
  Dataset Subset(std::span<const std::size_t> rows) const;

  // Throws DataError if target length differs from row count or any value is
  // not finite.
  void Validate() const;
};

}  // namespace effektor

#endif  // EFFEKTOR_DATASET_HPP_
