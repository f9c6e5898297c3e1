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

#ifndef EFFEKTOR_MODEL_HPP_
#define EFFEKTOR_MODEL_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "effektor/dataset.hpp"
#include "effektor/dgp.hpp"

namespace effektor {

enum class ModelKind { kGroundTruth, kFunction, kRidgeBasis, kBoostedTrees, kLinear };

struct ModelInfo {
  ModelKind kind = ModelKind::kFunction;
  std::string learner_id;
  std::string config_id;
  std::uint64_t training_seed = 0;
};

// An immutable prediction function over p features. Implementations must be
// safe to call concurrently from many threads.
class PredictionModel {
 public:
  virtual ~PredictionModel() = default;

  int num_features() const { return num_features_; }
  const ModelInfo& info() const { return info_; }

  // One prediction per row. Throws DataError on a column count mismatch.
  Vector Predict(const FeatureMatrix& x) const;

  // Individual conditional expectation block:
  //   out(i, g) = f(x with column `feature` set to grid[g]) for row i of rows.
  // `out` must be rows.rows() x grid.size().
  void PredictIce(const FeatureMatrix& rows, int feature,
                  std::span<const double> grid,
                  Eigen::Ref<Eigen::MatrixXd> out) const;

 protected:
  PredictionModel(int num_features, ModelInfo info);

  virtual Vector PredictRows(const FeatureMatrix& x) const = 0;

  // Default replicates each row once per grid value and calls PredictRows.
  // Models with a cheaper path (trees) override this.
  virtual void PredictIceRows(const FeatureMatrix& rows, int feature,
                              std::span<const double> grid,
                              Eigen::Ref<Eigen::MatrixXd> out) const;

 private:
  int num_features_;
  ModelInfo info_;
};

using ModelPtr = std::shared_ptr<const PredictionModel>;

using RowFunction = std::function<double(std::span<const double>)>;

// Wraps an arbitrary row function. The function must be pure.
ModelPtr MakeFunctionModel(int num_features, RowFunction fn,
                           std::string id = "function");

// Wraps the noiseless regression function of a setting.
ModelPtr MakeGroundTruthModel(const DgpSpec& spec);

// (1/n) sum (y_i - f(x_i))^2. Throws DataError on empty data.
double EmpiricalRisk(const PredictionModel& model, const Dataset& data);

}  // namespace effektor

#endif  // EFFEKTOR_MODEL_HPP_
