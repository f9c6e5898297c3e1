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

#ifndef EFFEKTOR_DGP_HPP_
#define EFFEKTOR_DGP_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "effektor/dataset.hpp"

namespace effektor {

std::string_view SettingName(Setting setting);
// Accepts the canonical names ("SimpleNormalCorrelated", "Friedman1",
// "Feynman12916"). Throws ConfigError otherwise.
Setting ParseSetting(std::string_view name);

// Marginal law of a single feature.
struct Marginal {
  enum class Kind { kStandardNormal, kUniform, kLogUniform };
  Kind kind = Kind::kStandardNormal;
  double a = 0.0;
  double b = 1.0;

  static Marginal StandardNormal() { return {Kind::kStandardNormal, 0, 0}; }
  static Marginal Uniform(double a, double b) { return {Kind::kUniform, a, b}; }
  static Marginal LogUniform(double a, double b) {
    return {Kind::kLogUniform, a, b};
  }

  // Inverse CDF. Throws DomainError unless 0 < p < 1.
  double Quantile(double p) const;
  double Cdf(double x) const;
  bool InSupport(double x) const;
};

// One of the three data-generating processes. Immutable once constructed.
class DgpSpec {
 public:
  // Validates that `correlation` is a symmetric positive definite matrix with
  // unit diagonal matching the marginals. Throws ConfigError otherwise.
  DgpSpec(Setting setting, std::vector<Marginal> marginals,
          Eigen::MatrixXd correlation, std::vector<int> dummy_features);

  static DgpSpec Make(Setting setting);

  Setting setting() const { return setting_; }
  std::string_view name() const { return SettingName(setting_); }
  int p() const { return static_cast<int>(marginals_.size()); }
  const std::vector<Marginal>& marginals() const { return marginals_; }
  const Marginal& marginal(int feature) const;
  const Eigen::MatrixXd& correlation() const { return correlation_; }
  // Lower-triangular factor of the correlation matrix.
  const Eigen::MatrixXd& cholesky_factor() const { return cholesky_; }
  const std::vector<int>& dummy_features() const { return dummies_; }
  bool IsDummy(int feature) const;
  bool independent() const { return independent_; }

 private:
  Setting setting_;
  std::vector<Marginal> marginals_;
  Eigen::MatrixXd correlation_;
  Eigen::MatrixXd cholesky_;
  std::vector<int> dummies_;
  bool independent_ = true;
};

struct NoiseCalibration {
  double sigma_eps = 0.0;
  double snr = 0.0;
  std::size_t pilot_n = 0;
};

// Draws n i.i.d. rows from the joint feature law. Correlated features use a
// Gaussian copula driven by the Cholesky factor.
FeatureMatrix SampleFeatures(const DgpSpec& spec, std::size_t n,
                             std::uint64_t seed);

// Noiseless regression function of the setting. `x` holds all p features;
// dummy features are ignored.
double GroundTruth(const DgpSpec& spec, std::span<const double> x);

// sigma_eps = sd(f(X)) / snr over a noiseless pilot sample.
NoiseCalibration CalibrateNoise(const DgpSpec& spec, double snr,
                                std::size_t pilot_n, std::uint64_t seed);

// y = f(x) + eps, eps ~ N(0, sigma_eps^2) i.i.d.
Dataset SampleDataset(const DgpSpec& spec, std::size_t n,
                      const NoiseCalibration& cal, std::uint64_t seed);

double TheoreticalQuantile(const DgpSpec& spec, int feature, double p);

// Closed-form partial dependence of f. Uncentered values are the marginal
// expectation over the complement features; centered values have zero mean
// under the marginal of the feature. Throws UnsupportedError for Feynman12916.
double AnalyticPd(const DgpSpec& spec, int feature, double x, bool centered);

// Closed-form accumulated local effect of f. Uncentered values are anchored at
// the lower support bound for bounded marginals and at 0 for the standard
// normal. Throws UnsupportedError for Feynman12916.
double AnalyticAle(const DgpSpec& spec, int feature, double x, bool centered);

}  // namespace effektor

#endif  // EFFEKTOR_DGP_HPP_
