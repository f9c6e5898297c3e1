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

#include "effektor/model.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "effektor/error.hpp"

namespace effektor {
namespace {

constexpr Eigen::Index kIceBatchRows = 16384;

class FunctionModel final : public PredictionModel {
 public:
  FunctionModel(int p, RowFunction fn, ModelInfo info)
      : PredictionModel(p, std::move(info)), fn_(std::move(fn)) {}

 protected:
  Vector PredictRows(const FeatureMatrix& x) const override {
    Vector out(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      out(i) = fn_({x.row(i).data(), static_cast<std::size_t>(x.cols())});
    }
    return out;
  }

 private:
  RowFunction fn_;
};

}  // namespace

PredictionModel::PredictionModel(int num_features, ModelInfo info)
    : num_features_(num_features), info_(std::move(info)) {}

Vector PredictionModel::Predict(const FeatureMatrix& x) const {
  if (x.rows() == 0) return Vector();
  if (x.cols() != num_features_) {
    throw DataError("model expects " + std::to_string(num_features_) +
                    " features, got " + std::to_string(x.cols()));
  }
  return PredictRows(x);
}

void PredictionModel::PredictIce(const FeatureMatrix& rows, int feature,
                                 std::span<const double> grid,
                                 Eigen::Ref<Eigen::MatrixXd> out) const {
  if (rows.rows() > 0 && rows.cols() != num_features_) {
    throw DataError("model expects " + std::to_string(num_features_) +
                    " features, got " + std::to_string(rows.cols()));
  }
  if (feature < 0 || feature >= num_features_) {
    throw DataError("feature index out of range");
  }
  if (out.rows() != rows.rows() ||
      out.cols() != static_cast<Eigen::Index>(grid.size())) {
    throw DataError("ICE output block has the wrong shape");
  }
  if (rows.rows() == 0 || grid.empty()) return;
  PredictIceRows(rows, feature, grid, out);
}

void PredictionModel::PredictIceRows(const FeatureMatrix& rows, int feature,
                                     std::span<const double> grid,
                                     Eigen::Ref<Eigen::MatrixXd> out) const {
  const auto g_count = static_cast<Eigen::Index>(grid.size());
  const Eigen::Index rows_per_batch = std::max<Eigen::Index>(1, kIceBatchRows / g_count);
  FeatureMatrix batch;
  for (Eigen::Index start = 0; start < rows.rows(); start += rows_per_batch) {
    const Eigen::Index count = std::min(rows_per_batch, rows.rows() - start);
    batch.resize(count * g_count, rows.cols());
    for (Eigen::Index i = 0; i < count; ++i) {
      for (Eigen::Index g = 0; g < g_count; ++g) {
        batch.row(i * g_count + g) = rows.row(start + i);
        batch(i * g_count + g, feature) = grid[static_cast<std::size_t>(g)];
      }
    }
    const Vector pred = PredictRows(batch);
    for (Eigen::Index i = 0; i < count; ++i) {
      for (Eigen::Index g = 0; g < g_count; ++g) {
        out(start + i, g) = pred(i * g_count + g);
      }
    }
  }
}

ModelPtr MakeFunctionModel(int num_features, RowFunction fn, std::string id) {
  ModelInfo info;
  info.kind = ModelKind::kFunction;
  info.learner_id = std::move(id);
  return std::make_shared<FunctionModel>(num_features, std::move(fn),
                                         std::move(info));
}

ModelPtr MakeGroundTruthModel(const DgpSpec& spec) {
  ModelInfo info;
  info.kind = ModelKind::kGroundTruth;
  info.learner_id = "truth";
  info.config_id = std::string(spec.name());
  return std::make_shared<FunctionModel>(
      spec.p(), [spec](std::span<const double> x) { return GroundTruth(spec, x); },
      std::move(info));
}

double EmpiricalRisk(const PredictionModel& model, const Dataset& data) {
  if (data.n() == 0) throw DataError("empirical risk needs non-empty data");
  const Vector pred = model.Predict(data.features);
  return (data.target - pred).squaredNorm() / static_cast<double>(data.n());
}

}  // namespace effektor
