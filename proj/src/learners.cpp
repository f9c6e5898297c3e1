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

#include "effektor/learners.hpp"

#include <string>

#include "effektor/error.hpp"
#include "effektor/linear_model.hpp"

namespace effektor {
namespace {

std::vector<std::pair<int, int>> InteractionPairs(Setting setting) {
  switch (setting) {
    case Setting::kSimpleNormalCorrelated:
    case Setting::kFriedman1:
      return {{0, 1}};
    case Setting::kFeynman12916:
      return {{0, 1}, {2, 3}};
  }
  return {};
}

}  // namespace

std::string_view LearnerName(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kRidgeBasis:
      return "RidgeBasis";
    case LearnerKind::kBoostedTrees:
      return "BoostedTrees";
    case LearnerKind::kLinear:
      return "Linear";
    case LearnerKind::kGroundTruth:
      return "GroundTruth";
  }
  return "unknown";
}

LearnerKind ParseLearner(std::string_view name) {
  for (const LearnerKind k : {LearnerKind::kRidgeBasis, LearnerKind::kBoostedTrees,
                              LearnerKind::kLinear, LearnerKind::kGroundTruth}) {
    if (LearnerName(k) == name) return k;
  }
  throw ConfigError("unknown learner '" + std::string(name) + "'");
}

std::string_view ModeName(LearnerMode mode) {
  return mode == LearnerMode::kOT ? "OT" : "OF";
}

LearnerMode ParseMode(std::string_view name) {
  if (name == "OT") return LearnerMode::kOT;
  if (name == "OF") return LearnerMode::kOF;
  throw ConfigError("unknown learner mode '" + std::string(name) + "'");
}

std::string LearnerConfig::id() const {
  return std::string(LearnerName(learner)) + "_" + std::string(ModeName(mode));
}

void LearnerConfig::Validate() const {
  switch (learner) {
    case LearnerKind::kRidgeBasis:
      ridge.Validate();
      break;
    case LearnerKind::kBoostedTrees:
      trees.Validate();
      break;
    case LearnerKind::kLinear:
    case LearnerKind::kGroundTruth:
      break;
  }
}

LearnerConfig PresetConfig(LearnerKind learner, LearnerMode mode,
                           Setting setting, std::size_t n) {
  LearnerConfig cfg;
  cfg.learner = learner;
  cfg.mode = mode;
  const bool large = n >= 5000;
  cfg.ridge.interaction_pairs = InteractionPairs(setting);
  cfg.ridge.interactions = true;
  if (mode == LearnerMode::kOT) {
    cfg.ridge.basis_size = 10;
    cfg.ridge.interaction_basis_size = 4;
    cfg.ridge.lambda = 1.0;

    cfg.trees.rounds = large ? 400 : 200;
    cfg.trees.max_depth = 3;
    cfg.trees.learning_rate = 0.1;
    cfg.trees.min_samples_leaf = 10;
    cfg.trees.subsample = 0.8;
    cfg.trees.max_bins = 128;
  } else {
    cfg.ridge.basis_size = large ? 50 : 30;
    cfg.ridge.interaction_basis_size = large ? 10 : 8;
    cfg.ridge.lambda = 1e-6;

    cfg.trees.rounds = 100;
    cfg.trees.max_depth = 8;
    cfg.trees.learning_rate = 0.5;
    cfg.trees.min_samples_leaf = 1;
    cfg.trees.subsample = 1.0;
    cfg.trees.max_bins = 256;
  }
  return cfg;
}

ModelPtr FitLearner(const LearnerConfig& config, const Dataset& data,
                    std::uint64_t seed) {
  config.Validate();
  ModelInfo info;
  info.learner_id = std::string(LearnerName(config.learner));
  info.config_id = config.id();
  info.training_seed = seed;
  switch (config.learner) {
    case LearnerKind::kRidgeBasis:
      return FitRidgeBasis(data, config.ridge, std::move(info));
    case LearnerKind::kBoostedTrees:
      return FitBoostedTrees(data, config.trees, seed, std::move(info));
    case LearnerKind::kLinear:
      return FitLinear(data);
    case LearnerKind::kGroundTruth:
      return MakeGroundTruthModel(DgpSpec::Make(data.setting));
  }
  throw ConfigError("unknown learner");
}

}  // namespace effektor
