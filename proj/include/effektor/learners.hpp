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

#ifndef EFFEKTOR_LEARNERS_HPP_
#define EFFEKTOR_LEARNERS_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

#include "effektor/boosted_trees.hpp"
#include "effektor/dataset.hpp"
#include "effektor/model.hpp"
#include "effektor/ridge_basis.hpp"

namespace effektor {

// GroundTruth ignores the training data and returns f itself. It is a test
// oracle with no model bias or variance.
enum class LearnerKind { kRidgeBasis, kBoostedTrees, kLinear, kGroundTruth };
// OT: tuned to generalize. OF: deliberately overfitting.
enum class LearnerMode { kOT, kOF };

std::string_view LearnerName(LearnerKind kind);
LearnerKind ParseLearner(std::string_view name);
std::string_view ModeName(LearnerMode mode);
LearnerMode ParseMode(std::string_view name);

struct LearnerConfig {
  LearnerKind learner = LearnerKind::kBoostedTrees;
  LearnerMode mode = LearnerMode::kOT;
  RidgeBasisParams ridge;
  BoostedTreesParams trees;

  // "<learner>_<mode>", e.g. "BoostedTrees_OF".
  std::string id() const;
  void Validate() const;
};

// Version tag of the shipped hyperparameter table below.
inline constexpr std::string_view kPresetVersion = "presets-v1";

// Shipped hyperparameters for a (setting, n, mode) cell. Sample sizes below
// 5000 use the small-sample row of the table.
LearnerConfig PresetConfig(LearnerKind learner, LearnerMode mode,
                           Setting setting, std::size_t n);

// Fits the configured learner. `seed` drives any algorithmic randomness.
ModelPtr FitLearner(const LearnerConfig& config, const Dataset& data,
                    std::uint64_t seed);

}  // namespace effektor

#endif  // EFFEKTOR_LEARNERS_HPP_
