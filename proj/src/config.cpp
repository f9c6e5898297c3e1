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

#include "effektor/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "effektor/dgp.hpp"
#include "effektor/error.hpp"
#include "effektor/random.hpp"

namespace effektor {
namespace {

using nlohmann::json;

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "schema_version", "setting", "n",     "learners",       "strategies", "kinds",
      "features",       "M",       "R",     "G",              "n_gt",       "snr",
      "pilot_n",        "master_seed",    "folds", "split_fraction", "rq3"};
  return keys;
}

template <typename T>
T Get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid value for '") + key + "': " + e.what());
  }
}

std::size_t GetCount(const json& j, const char* key) {
  if (!j.at(key).is_number_unsigned()) {
    throw ConfigError(std::string("'") + key + "' must be a nonnegative integer");
  }
  return j.at(key).get<std::size_t>();
}

}  // namespace

std::vector<int> ExperimentConfig::ResolvedFeatures() const {
  if (!features.empty()) return features;
  std::vector<int> all(static_cast<std::size_t>(DgpSpec::Make(setting).p()));
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = static_cast<int>(j);
  return all;
}

void ExperimentConfig::Validate() const {
  if (M < 2) throw ConfigError("M must be at least 2");
  if (R < 2) throw ConfigError("R must be at least 2");
  if (G < 3) throw ConfigError("G must be at least 3");
  if (n < 2) throw ConfigError("n must be at least 2");
  if (n_gt < 1) throw ConfigError("n_gt must be positive");
  if (!(snr > 0.0) || !std::isfinite(snr)) throw ConfigError("snr must be positive");
  if (pilot_n < 1000) throw ConfigError("pilot_n must be at least 1000");
  if (learners.empty()) throw ConfigError("at least one learner is required");
  if (strategies.empty()) throw ConfigError("at least one strategy is required");
  if (kinds.empty()) throw ConfigError("at least one effect kind is required");
  if (rq3_repetitions < 1) throw ConfigError("rq3 repetitions must be positive");
  StrategySpec probe;
  probe.folds = folds;
  probe.split_fraction = split_fraction;
  probe.Validate();
  if (std::find(strategies.begin(), strategies.end(), StrategyKind::kKFoldCV) != strategies.end() &&
      n < folds) {
    throw ConfigError("n must be at least the number of folds");
  }
  const int p = DgpSpec::Make(setting).p();
  for (const int f : features) {
    if (f < 0 || f >= p) {
      throw ConfigError("feature " + std::to_string(f + 1) + " out of range 1.." +
                        std::to_string(p));
    }
  }
  for (const std::size_t s : rq3_sizes) {
    if (s < 1) throw ConfigError("rq3 sizes must be positive");
  }
}

std::vector<std::size_t> LogLadder(std::size_t lo, std::size_t hi, std::size_t count) {
  if (lo < 1 || hi < lo || count < 1) throw ConfigError("invalid size ladder bounds");
  std::vector<std::size_t> sizes;
  const double a = std::log10(static_cast<double>(lo));
  const double b = std::log10(static_cast<double>(hi));
  for (std::size_t k = 0; k < count; ++k) {
    const double t = count == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(count - 1);
    const auto s = static_cast<std::size_t>(std::llround(std::pow(10.0, a + t * (b - a))));
    if (sizes.empty() || s != sizes.back()) sizes.push_back(s);
  }
  return sizes;
}

std::vector<std::size_t> DefaultLadder(bool full) {
  return full ? LogLadder(10, 1000000, 50) : LogLadder(10, 100000, 25);
}

ExperimentConfig ParseConfigText(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& item : j.items()) {
    if (!KnownKeys().count(item.key())) throw ConfigError("unknown config key '" + item.key() + "'");
  }
  if (!j.contains("schema_version")) throw ConfigError("missing schema_version");
  if (Get<int>(j, "schema_version") != kConfigSchemaVersion) {
    throw ConfigError("unsupported schema_version (expected " +
                      std::to_string(kConfigSchemaVersion) + ")");
  }
  if (!j.contains("setting")) throw ConfigError("missing setting");

  ExperimentConfig cfg;
  cfg.setting = ParseSetting(Get<std::string>(j, "setting"));
  if (j.contains("n")) cfg.n = GetCount(j, "n");
  if (j.contains("learners")) {
    cfg.learners.clear();
    for (const auto& entry : j.at("learners")) {
      if (!entry.is_object()) throw ConfigError("learner entries must be objects");
      for (const auto& item : entry.items()) {
        if (item.key() != "learner" && item.key() != "mode") {
          throw ConfigError("unknown learner key '" + item.key() + "'");
        }
      }
      LearnerEntry le;
      le.learner = ParseLearner(Get<std::string>(entry, "learner"));
      if (entry.contains("mode")) le.mode = ParseMode(Get<std::string>(entry, "mode"));
      cfg.learners.push_back(le);
    }
  }
  if (j.contains("strategies")) {
    cfg.strategies.clear();
    for (const auto& s : Get<std::vector<std::string>>(j, "strategies")) {
      cfg.strategies.push_back(ParseStrategy(s));
    }
  }
  if (j.contains("kinds")) {
    cfg.kinds.clear();
    for (const auto& s : Get<std::vector<std::string>>(j, "kinds")) {
      cfg.kinds.push_back(ParseEffectKind(s));
    }
  }
  if (j.contains("features")) {
    for (const int f : Get<std::vector<int>>(j, "features")) cfg.features.push_back(f - 1);
  }
  if (j.contains("M")) cfg.M = GetCount(j, "M");
  if (j.contains("R")) cfg.R = GetCount(j, "R");
  if (j.contains("G")) cfg.G = GetCount(j, "G");
  if (j.contains("n_gt")) cfg.n_gt = GetCount(j, "n_gt");
  if (j.contains("snr")) cfg.snr = Get<double>(j, "snr");
  if (j.contains("pilot_n")) cfg.pilot_n = GetCount(j, "pilot_n");
  if (j.contains("master_seed")) cfg.master_seed = Get<std::uint64_t>(j, "master_seed");
  if (j.contains("folds")) cfg.folds = GetCount(j, "folds");
  if (j.contains("split_fraction")) cfg.split_fraction = Get<double>(j, "split_fraction");
  if (j.contains("rq3")) {
    const json& r = j.at("rq3");
    if (!r.is_object()) throw ConfigError("rq3 must be an object");
    for (const auto& item : r.items()) {
      if (item.key() != "sizes" && item.key() != "repetitions" && item.key() != "full") {
        throw ConfigError("unknown rq3 key '" + item.key() + "'");
      }
    }
    const bool full = r.contains("full") && Get<bool>(r, "full");
    if (full) {
      cfg.rq3_sizes = DefaultLadder(true);
      cfg.rq3_repetitions = 50;
    }
    if (r.contains("sizes")) cfg.rq3_sizes = Get<std::vector<std::size_t>>(r, "sizes");
    if (r.contains("repetitions")) cfg.rq3_repetitions = GetCount(r, "repetitions");
  }
  cfg.Validate();
  return cfg;
}

ExperimentConfig ParseConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfigText(buffer.str());
}

std::string ConfigToJson(const ExperimentConfig& cfg) {
  json j;
  j["schema_version"] = kConfigSchemaVersion;
  j["setting"] = std::string(SettingName(cfg.setting));
  j["n"] = cfg.n;
  j["learners"] = json::array();
  for (const auto& le : cfg.learners) {
    j["learners"].push_back({{"learner", std::string(LearnerName(le.learner))},
                             {"mode", std::string(ModeName(le.mode))}});
  }
  j["strategies"] = json::array();
  for (const auto s : cfg.strategies) j["strategies"].push_back(std::string(StrategyName(s)));
  j["kinds"] = json::array();
  for (const auto k : cfg.kinds) j["kinds"].push_back(std::string(EffectKindName(k)));
  j["features"] = json::array();
  for (const int f : cfg.ResolvedFeatures()) j["features"].push_back(f + 1);
  j["M"] = cfg.M;
  j["R"] = cfg.R;
  j["G"] = cfg.G;
  j["n_gt"] = cfg.n_gt;
  j["snr"] = cfg.snr;
  j["pilot_n"] = cfg.pilot_n;
  j["master_seed"] = cfg.master_seed;
  j["folds"] = cfg.folds;
  j["split_fraction"] = cfg.split_fraction;
  j["rq3"] = {{"sizes", cfg.rq3_sizes}, {"repetitions", cfg.rq3_repetitions}};
  return j.dump(2);
}

std::uint64_t ConfigHash(const ExperimentConfig& cfg) {
  return HashTag(ConfigToJson(cfg));
}

}  // namespace effektor
