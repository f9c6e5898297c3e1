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


#ifndef EFFEKTOR_EXPERIMENT_HPP_
#define EFFEKTOR_EXPERIMENT_HPP_

#include <cstddef>
#include <functional>
#include <vector>

#include "effektor/config.hpp"
#include "effektor/decomp.hpp"
#include "effektor/results.hpp"

namespace effektor {

struct RunOptions {
  std::size_t threads = 1;
};

struct RunOutput {
  std::vector<ResultRow> rows;
  std::size_t incomplete_cells = 0;
};

// Runs fn(0) .. fn(count - 1) on `threads` workers. The first exception is
// rethrown after all workers finish.
void ParallelFor(std::size_t count, std::size_t threads,
                 const std::function<void(std::size_t)>& fn);

// One ensemble per (learner, strategy, kind, feature) cell in config order.
// Cells whose fit or estimation failed in some repetitions keep the
// remaining ones and record the number of failures.
struct CellEnsemble {
  CurveEnsemble ensemble;
  std::size_t failures = 0;
  std::size_t curves_with_empty_bins = 0;
};

std::vector<CellEnsemble> BuildEnsembles(const ExperimentConfig& cfg, bool with_repeats,
                                         const RunOptions& opts);

// mse / bias / var rows.
RunOutput RunRq1(const ExperimentConfig& cfg, const RunOptions& opts);
// var_tot / var_model / var_est rows.
RunOutput RunRq2(const ExperimentConfig& cfg, const RunOptions& opts);
// estimation_error rows of the ground-truth function per ladder size.
// Throws ConfigError for settings without a closed-form effect.
RunOutput RunRq3(const ExperimentConfig& cfg, const RunOptions& opts);

}  // namespace effektor

#endif  // EFFEKTOR_EXPERIMENT_HPP_
