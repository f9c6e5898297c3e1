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

#include "effektor/results.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "effektor/error.hpp"
#include "effektor/learners.hpp"
#include "effektor/version.hpp"

namespace effektor {
namespace {

std::vector<std::string_view> SplitView(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      parts.push_back(text.substr(start));
      return parts;
    }
    parts.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

double ParseDouble(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("malformed number '" + std::string(s) + "' in results");
  }
  return v;
}

std::size_t ParseCount(std::string_view s) {
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw DataError("malformed count '" + std::string(s) + "' in results");
  }
  return v;
}

bool SameDouble(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

bool ResultRow::operator==(const ResultRow& o) const {
  if (setting != o.setting || n != o.n || learner != o.learner || mode != o.mode ||
      strategy != o.strategy || kind != o.kind || feature != o.feature || metric != o.metric ||
      M != o.M || R != o.R || flags != o.flags || status != o.status ||
      !SameDouble(aggregate, o.aggregate) || values.size() != o.values.size()) {
    return false;
  }
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!SameDouble(values[j], o.values[j])) return false;
  }
  return true;
}

std::string FormatDouble(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string FormatResultsCsv(const std::vector<ResultRow>& rows) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const ResultRow& r : rows) {
    out += r.setting + ',' + std::to_string(r.n) + ',' + r.learner + ',' + r.mode + ',' +
           r.strategy + ',' + r.kind + ',' + std::to_string(r.feature) + ',' + r.metric + ',' +
           std::to_string(r.M) + ',' + std::to_string(r.R) + ',' + FormatDouble(r.aggregate) +
           ',' + r.flags + ',' + r.status + ',';
    for (std::size_t j = 0; j < r.values.size(); ++j) {
      if (j > 0) out += ';';
      out += FormatDouble(r.values[j]);
    }
    out += '\n';
  }
  return out;
}

std::vector<ResultRow> ParseResultsCsv(std::string_view text) {
  std::vector<ResultRow> rows;
  std::vector<std::string_view> lines = SplitView(text, '\n');
  if (lines.empty() || lines.front() != kResultsHeader) {
    throw DataError("results file does not start with the expected header");
  }
  for (std::size_t l = 1; l < lines.size(); ++l) {
    if (lines[l].empty()) continue;
    const auto f = SplitView(lines[l], ',');
    if (f.size() != 14) throw DataError("results line " + std::to_string(l + 1) + " has " +
                                        std::to_string(f.size()) + " fields, expected 14");
    ResultRow r;
    r.setting = f[0];
    r.n = ParseCount(f[1]);
    r.learner = f[2];
    r.mode = f[3];
    r.strategy = f[4];
    r.kind = f[5];
    r.feature = static_cast<int>(ParseCount(f[6]));
    r.metric = f[7];
    r.M = ParseCount(f[8]);
    r.R = ParseCount(f[9]);
    r.aggregate = ParseDouble(f[10]);
    r.flags = f[11];
    r.status = f[12];
    if (!f[13].empty()) {
      for (const auto v : SplitView(f[13], ';')) r.values.push_back(ParseDouble(v));
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

void WriteResults(const std::vector<ResultRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write results to '" + path + "'");
  out << FormatResultsCsv(rows);
}

std::vector<ResultRow> ReadResults(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read results from '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseResultsCsv(buffer.str());
}

std::string ManifestJson(const ExperimentConfig& cfg, int rq, std::size_t num_rows) {
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(ConfigHash(cfg)));
  nlohmann::json j;
  j["version"] = std::string(kVersion);
  j["presets"] = std::string(kPresetVersion);
  j["rq"] = rq;
  j["config_hash"] = hash;
  j["master_seed"] = cfg.master_seed;
  j["rows"] = num_rows;
  j["config"] = nlohmann::json::parse(ConfigToJson(cfg));
  return j.dump(2) + "\n";
}

}  // namespace effektor
