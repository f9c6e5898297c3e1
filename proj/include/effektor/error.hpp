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

#ifndef EFFEKTOR_ERROR_HPP_
#define EFFEKTOR_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace effektor {

// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration: bad DGP parameters, learner hyperparameters,
// experiment config keys or values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violates a precondition (NaN, dimension mismatch, empty).
class DataError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A learner could not produce a fitted model.
class FitError : public Error {
 public:
  using Error::Error;
};

// An effect estimator or oracle could not produce a value.
class EstimationError : public Error {
 public:
  using Error::Error;
};

// Requested quantity has no closed form for this setting.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace effektor

#endif  // EFFEKTOR_ERROR_HPP_
