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

#include "effektor/dgp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "effektor/error.hpp"
#include "effektor/random.hpp"

namespace effektor {
namespace {

constexpr double kPi = std::numbers::pi;

void CheckFeature(const DgpSpec& spec, int feature) {
  if (feature < 0 || feature >= spec.p()) {
    throw DomainError("feature index " + std::to_string(feature) +
                      " out of range [0, " + std::to_string(spec.p()) + ")");
  }
}

// E[sin(pi x U)] for U ~ U(0,1).
double MeanSinProduct(double x) {
  if (std::abs(x) < 1e-8) return kPi * x / 2.0;
  return (1.0 - std::cos(kPi * x)) / (kPi * x);
}

// E[sin(pi U1 U2)] for independent uniforms. No elementary antiderivative.
double MeanSinProductBoth() {
  static const double value = [] {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        MeanSinProduct, 0.0, 1.0, 15, 1e-12);
  }();
  return value;
}

double FriedmanPd(int feature, double x) {
  const double sin_mean = 10.0 * MeanSinProductBoth();
  const double quad_mean = 20.0 / 12.0;
  const double lin4_mean = 5.0;
  const double lin5_mean = 2.5;
  switch (feature) {
    case 0:
    case 1:
      return 10.0 * MeanSinProduct(x) + quad_mean + lin4_mean + lin5_mean;
    case 2:
      return sin_mean + 20.0 * (x - 0.5) * (x - 0.5) + lin4_mean + lin5_mean;
    case 3:
      return sin_mean + quad_mean + 10.0 * x + lin5_mean;
    case 4:
      return sin_mean + quad_mean + lin4_mean + 5.0 * x;
    default:
      return sin_mean + quad_mean + lin4_mean + lin5_mean;
  }
}

double FriedmanMean() {
  return 10.0 * MeanSinProductBoth() + 20.0 / 12.0 + 5.0 + 2.5;
}

}  // namespace

std::string_view SettingName(Setting setting) {
  switch (setting) {
    case Setting::kSimpleNormalCorrelated:
      return "SimpleNormalCorrelated";
    case Setting::kFriedman1:
      return "Friedman1";
    case Setting::kFeynman12916:
      return "Feynman12916";
  }
  return "unknown";
}

Setting ParseSetting(std::string_view name) {
  for (const Setting s : {Setting::kSimpleNormalCorrelated,
                          Setting::kFriedman1, Setting::kFeynman12916}) {
    if (SettingName(s) == name) return s;
  }
  throw ConfigError("unknown setting '" + std::string(name) + "'");
}

double Marginal::Quantile(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("quantile probability must lie in (0, 1), got " +
                      std::to_string(p));
  }
  switch (kind) {
    case Kind::kStandardNormal:
      return boost::math::quantile(boost::math::normal_distribution<double>(),
                                   p);
    case Kind::kUniform:
      return a + (b - a) * p;
    case Kind::kLogUniform:
      return std::exp(std::log(a) + p * (std::log(b) - std::log(a)));
  }
  return 0.0;
}

double Marginal::Cdf(double x) const {
  switch (kind) {
    case Kind::kStandardNormal:
      return boost::math::cdf(boost::math::normal_distribution<double>(), x);
    case Kind::kUniform:
      return std::clamp((x - a) / (b - a), 0.0, 1.0);
    case Kind::kLogUniform:
      if (x <= a) return 0.0;
      return std::clamp(
          (std::log(x) - std::log(a)) / (std::log(b) - std::log(a)), 0.0, 1.0);
  }
  return 0.0;
}

bool Marginal::InSupport(double x) const {
  if (kind == Kind::kStandardNormal) return std::isfinite(x);
  return x >= a && x <= b;
}

DgpSpec::DgpSpec(Setting setting, std::vector<Marginal> marginals,
                 Eigen::MatrixXd correlation, std::vector<int> dummy_features)
    : setting_(setting),
      marginals_(std::move(marginals)),
      correlation_(std::move(correlation)),
      dummies_(std::move(dummy_features)) {
  const auto p = static_cast<Eigen::Index>(marginals_.size());
  if (p == 0) throw ConfigError("a DGP needs at least one feature");
  if (correlation_.rows() != p || correlation_.cols() != p) {
    throw ConfigError("correlation matrix must be " + std::to_string(p) + "x" +
                      std::to_string(p));
  }
  for (const Marginal& m : marginals_) {
    if (m.kind != Marginal::Kind::kStandardNormal && !(m.a < m.b)) {
      throw ConfigError("marginal bounds must satisfy a < b");
    }
    if (m.kind == Marginal::Kind::kLogUniform && !(m.a > 0.0)) {
      throw ConfigError("log-uniform lower bound must be positive");
    }
  }
  if (!correlation_.isApprox(correlation_.transpose(), 1e-12)) {
    throw ConfigError("correlation matrix is not symmetric");
  }
  for (Eigen::Index i = 0; i < p; ++i) {
    if (std::abs(correlation_(i, i) - 1.0) > 1e-12) {
      throw ConfigError("correlation matrix must have unit diagonal");
    }
  }
  Eigen::LLT<Eigen::MatrixXd> llt(correlation_);
  if (llt.info() != Eigen::Success) {
    throw ConfigError("correlation matrix is not positive definite");
  }
  cholesky_ = llt.matrixL();
  independent_ = correlation_.isIdentity(0.0);
  for (const int d : dummies_) {
    if (d < 0 || d >= p) throw ConfigError("dummy feature index out of range");
  }
}

DgpSpec DgpSpec::Make(Setting setting) {
  switch (setting) {
    case Setting::kSimpleNormalCorrelated: {
      Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(4, 4);
      corr(0, 1) = corr(1, 0) = 0.9;
      return DgpSpec(setting, std::vector<Marginal>(4, Marginal::StandardNormal()),
                     corr, {2, 3});
    }
    case Setting::kFriedman1:
      return DgpSpec(setting, std::vector<Marginal>(7, Marginal::Uniform(0, 1)),
                     Eigen::MatrixXd::Identity(7, 7), {5, 6});
    case Setting::kFeynman12916:
      return DgpSpec(setting,
                     {Marginal::LogUniform(0.1, 10), Marginal::LogUniform(0.1, 10),
                      Marginal::Uniform(0, 2 * kPi), Marginal::Uniform(0, 2 * kPi),
                      Marginal::Uniform(0, 1), Marginal::Uniform(0, 1)},
                     Eigen::MatrixXd::Identity(6, 6), {4, 5});
  }
  throw ConfigError("unknown setting");
}

const Marginal& DgpSpec::marginal(int feature) const {
  CheckFeature(*this, feature);
  return marginals_[static_cast<std::size_t>(feature)];
}

bool DgpSpec::IsDummy(int feature) const {
  return std::find(dummies_.begin(), dummies_.end(), feature) != dummies_.end();
}

FeatureMatrix SampleFeatures(const DgpSpec& spec, std::size_t n,
                             std::uint64_t seed) {
  if (n == 0) throw DataError("sample size must be at least 1");
  const int p = spec.p();
  FeatureMatrix x(static_cast<Eigen::Index>(n), p);
  Rng rng = MakeRng(seed);
  if (spec.independent()) {
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unit;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (int j = 0; j < p; ++j) {
        const Marginal& m = spec.marginals()[static_cast<std::size_t>(j)];
        double v = 0.0;
        switch (m.kind) {
          case Marginal::Kind::kStandardNormal:
            v = normal(rng);
            break;
          case Marginal::Kind::kUniform:
            v = std::min(m.a + (m.b - m.a) * unit(rng), m.b);
            break;
          case Marginal::Kind::kLogUniform:
            v = std::clamp(std::exp(std::log(m.a) + (std::log(m.b) -
                                                     std::log(m.a)) * unit(rng)),
                           m.a, m.b);
            break;
        }
        x(i, j) = v;
      }
    }
    return x;
  }
  std::normal_distribution<double> normal;
  const Eigen::MatrixXd& chol = spec.cholesky_factor();
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (int j = 0; j < p; ++j) z(j) = normal(rng);
    const Eigen::VectorXd corr = chol.triangularView<Eigen::Lower>() * z;
    for (int j = 0; j < p; ++j) {
      const Marginal& m = spec.marginals()[static_cast<std::size_t>(j)];
      if (m.kind == Marginal::Kind::kStandardNormal) {
        x(i, j) = corr(j);
      } else {
        const double u = std::clamp(Marginal::StandardNormal().Cdf(corr(j)),
                                    1e-16, 1.0 - 1e-16);
        x(i, j) = m.Quantile(u);
      }
    }
  }
  return x;
}

double GroundTruth(const DgpSpec& spec, std::span<const double> x) {
  switch (spec.setting()) {
    case Setting::kSimpleNormalCorrelated:
      return x[0] + 0.5 * x[1] * x[1] + x[0] * x[1];
    case Setting::kFriedman1:
      return 10.0 * std::sin(kPi * x[0] * x[1]) +
             20.0 * (x[2] - 0.5) * (x[2] - 0.5) + 10.0 * x[3] + 5.0 * x[4];
    case Setting::kFeynman12916: {
      const double r = x[0] * x[0] + x[1] * x[1] +
                       2.0 * x[0] * x[1] * std::cos(x[2] - x[3]);
      // r >= (x1 - x2)^2 >= 0 analytically; clamp rounding.
      return std::sqrt(std::max(r, 0.0));
    }
  }
  return 0.0;
}

NoiseCalibration CalibrateNoise(const DgpSpec& spec, double snr,
                                std::size_t pilot_n, std::uint64_t seed) {
  if (!(snr > 0.0) || !std::isfinite(snr)) {
    throw ConfigError("signal-to-noise ratio must be positive and finite");
  }
  if (pilot_n < 1000) throw ConfigError("pilot sample must have >= 1000 rows");
  const FeatureMatrix x = SampleFeatures(spec, pilot_n, seed);
  // Welford keeps the variance accurate for 10^6 draws.
  double mean = 0.0;
  double m2 = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double f =
        GroundTruth(spec, {x.row(i).data(), static_cast<std::size_t>(x.cols())});
    const double delta = f - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (f - mean);
  }
  const double sd = std::sqrt(m2 / static_cast<double>(pilot_n - 1));
  if (!(sd > 0.0)) {
    throw ConfigError("pilot sample of f has zero variance; cannot calibrate");
  }
  return {sd / snr, snr, pilot_n};
}

Dataset SampleDataset(const DgpSpec& spec, std::size_t n,
                      const NoiseCalibration& cal, std::uint64_t seed) {
  if (cal.sigma_eps < 0.0) throw ConfigError("sigma_eps must be nonnegative");
  Dataset data;
  data.setting = spec.setting();
  data.seed = seed;
  data.features = SampleFeatures(spec, n, seed);
  data.target.resize(data.features.rows());
  for (Eigen::Index i = 0; i < data.features.rows(); ++i) {
    data.target(i) = GroundTruth(
        spec, {data.features.row(i).data(),
               static_cast<std::size_t>(data.features.cols())});
  }
  if (cal.sigma_eps > 0.0) {
    Rng rng = MakeRng(DeriveSeed(seed, {HashTag("noise")}));
    std::normal_distribution<double> noise(0.0, cal.sigma_eps);
    for (Eigen::Index i = 0; i < data.target.size(); ++i) {
      data.target(i) += noise(rng);
    }
  }
  return data;
}

double TheoreticalQuantile(const DgpSpec& spec, int feature, double p) {
  return spec.marginal(feature).Quantile(p);
}

double AnalyticPd(const DgpSpec& spec, int feature, double x, bool centered) {
  CheckFeature(spec, feature);
  switch (spec.setting()) {
    case Setting::kSimpleNormalCorrelated:
      // Marginals are standard normal: E[X] = 0, E[X^2] = 1.
      if (feature == 0) return centered ? x : x + 0.5;
      if (feature == 1) return centered ? 0.5 * x * x - 0.5 : 0.5 * x * x;
      return centered ? 0.0 : 0.5;
    case Setting::kFriedman1: {
      const double pd = FriedmanPd(feature, x);
      return centered ? pd - FriedmanMean() : pd;
    }
    case Setting::kFeynman12916:
      break;
  }
  throw UnsupportedError("no analytic effect for setting " +
                         std::string(spec.name()));
}

double AnalyticAle(const DgpSpec& spec, int feature, double x, bool centered) {
  CheckFeature(spec, feature);
  switch (spec.setting()) {
    case Setting::kSimpleNormalCorrelated: {
      // E[X_other | X_s = t] = rho t for the correlated pair.
      const double rho = spec.correlation()(0, 1);
      if (feature == 0) {
        // d f / d x1 = 1 + x2.
        const double u = x + 0.5 * rho * x * x;
        return centered ? u - 0.5 * rho : u;
      }
      if (feature == 1) {
        // d f / d x2 = x2 + x1.
        const double u = 0.5 * (1.0 + rho) * x * x;
        return centered ? u - 0.5 * (1.0 + rho) : u;
      }
      return 0.0;
    }
    case Setting::kFriedman1: {
      // Independent features: local effects coincide with partial dependence.
      if (centered) return FriedmanPd(feature, x) - FriedmanMean();
      return FriedmanPd(feature, x) - FriedmanPd(feature, 0.0);
    }
    case Setting::kFeynman12916:
      break;
  }
  throw UnsupportedError("no analytic effect for setting " +
                         std::string(spec.name()));
}

}  // namespace effektor
