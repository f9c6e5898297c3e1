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


#ifndef EFFEKTOR_RESULTS_HPP_
#define EFFEKTOR_RESULTS_HPP_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "effektor/config.hpp"

namespace effektor {

// One metric of one cell. `values` holds the per-point values over the
// evaluated grid; NaN marks a missing entry.
struct ResultRow {
  std::string setting;
  std::size_t n = 0;
  std::string learner;
  std::string mode;
  std::string strategy;
  std::string kind;
  int feature = 0;  // 1-based
  std::string metric;
  std::size_t M = 0;
  std::size_t R = 0;
  double aggregate = 0.0;
  std::string flags;   // "key:count" entries joined by '|'
  std::string status;  // complete | incomplete | failed
  std::vector<double> values;

  bool operator==(const ResultRow& other) const;
};

inline constexpr std::string_view kResultsHeader =
    "setting,n,learner,mode,strategy,kind,feature,metric,M,R,aggregate,flags,status,values";

// Shortest round-trip decimal form; "nan" for NaN.
std::string FormatDouble(double v);

std::string FormatResultsCsv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> ParseResultsCsv(std::string_view text);

void WriteResults(const std::vector<ResultRow>& rows, const std::string& path);
std::vector<ResultRow> ReadResults(const std::string& path);

// JSON manifest: config hash, seed, library and preset versions, row count.
std::string ManifestJson(const ExperimentConfig& cfg, int rq, std::size_t num_rows);

}  // namespace effektor

#endif  // EFFEKTOR_RESULTS_HPP_
