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


#ifndef EFFEKTOR_CONFIG_HPP_
#define EFFEKTOR_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "effektor/dataset.hpp"
#include "effektor/effects.hpp"
#include "effektor/learners.hpp"
#include "effektor/strategies.hpp"

namespace effektor {

inline constexpr int kConfigSchemaVersion = 1;

// `count` sizes log-spaced over [lo, hi], rounded and deduplicated.
std::vector<std::size_t> LogLadder(std::size_t lo, std::size_t hi, std::size_t count);
// 25 sizes from 10 to 1e5; the full ladder has 50 sizes up to 1e6.
std::vector<std::size_t> DefaultLadder(bool full);

struct LearnerEntry {
  LearnerKind learner = LearnerKind::kBoostedTrees;
  LearnerMode mode = LearnerMode::kOF;
};

struct ExperimentConfig {
  Setting setting = Setting::kSimpleNormalCorrelated;
  std::size_t n = 1250;
  std::vector<LearnerEntry> learners{{}};
  std::vector<StrategyKind> strategies{StrategyKind::kTrainOnAll, StrategyKind::kHoldoutSplit,
                                       StrategyKind::kKFoldCV};
  std::vector<EffectKind> kinds{EffectKind::kPd, EffectKind::kAle};
  std::vector<int> features;  // 0-based; empty means every feature
  std::size_t M = 30;
  std::size_t R = 30;
  std::size_t G = 100;
  std::size_t n_gt = 10000;
  double snr = 5.0;
  std::size_t pilot_n = 1000000;
  std::uint64_t master_seed = 0;
  std::size_t folds = 5;
  double split_fraction = 0.8;
  // Size ladder and repetitions of the estimation-error sweep.
  std::vector<std::size_t> rq3_sizes = DefaultLadder(false);
  std::size_t rq3_repetitions = 25;

  // Features after resolving the empty default.
  std::vector<int> ResolvedFeatures() const;
  // Throws ConfigError on any violated invariant.
  void Validate() const;
};

// JSON config text. Unknown keys, a missing or different schema_version and
// invalid values raise ConfigError. Features are 1-based in the file.
ExperimentConfig ParseConfigText(std::string_view text);
ExperimentConfig ParseConfig(const std::string& path);

// Canonical JSON with every field spelled out.
std::string ConfigToJson(const ExperimentConfig& cfg);
std::uint64_t ConfigHash(const ExperimentConfig& cfg);

}  // namespace effektor

#endif  // EFFEKTOR_CONFIG_HPP_
