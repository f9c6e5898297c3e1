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

// Command-line front end: simulation runs and single effect curves.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "effektor/config.hpp"
#include "effektor/dgp.hpp"
#include "effektor/effects.hpp"
#include "effektor/error.hpp"
#include "effektor/experiment.hpp"
#include "effektor/learners.hpp"
#include "effektor/random.hpp"
#include "effektor/results.hpp"
#include "effektor/strategies.hpp"
#include "effektor/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitCellFailures = 2;

struct SimulateArgs {
  std::string config;
  int rq = 1;
  std::string out;
  std::size_t threads = 1;
  std::optional<std::uint64_t> seed;
};

struct EffectsArgs {
  std::string setting;
  int feature = 1;
  std::string kind = "pd";
  std::size_t n = 1000;
  std::uint64_t seed = 0;
  std::size_t grid = 100;
  std::string learner = "GroundTruth";
  std::string mode = "OT";
  std::string strategy = "train";
};

int Simulate(const SimulateArgs& args) {
  effektor::ExperimentConfig cfg = effektor::ParseConfig(args.config);
  if (args.seed) cfg.master_seed = *args.seed;
  effektor::RunOptions opts;
  opts.threads = args.threads;
  effektor::RunOutput result;
  switch (args.rq) {
    case 1: result = effektor::RunRq1(cfg, opts); break;
    case 2: result = effektor::RunRq2(cfg, opts); break;
    default: result = effektor::RunRq3(cfg, opts); break;
  }
  std::filesystem::create_directories(args.out);
  const std::filesystem::path dir(args.out);
  const std::string stem = "rq" + std::to_string(args.rq);
  effektor::WriteResults(result.rows, (dir / (stem + ".csv")).string());
  std::ofstream manifest(dir / (stem + "_manifest.json"));
  manifest << effektor::ManifestJson(cfg, args.rq, result.rows.size());
  std::cerr << "wrote " << result.rows.size() << " rows to " << (dir / (stem + ".csv")).string()
            << "\n";
  if (result.incomplete_cells > 0) {
    std::cerr << result.incomplete_cells << " cell(s) incomplete or failed\n";
    return kExitCellFailures;
  }
  return kExitOk;
}

int Effects(const EffectsArgs& args) {
  using namespace effektor;
  const Setting setting = ParseSetting(args.setting);
  const DgpSpec spec = DgpSpec::Make(setting);
  if (args.feature < 1 || args.feature > spec.p()) {
    throw ConfigError("feature must lie in 1.." + std::to_string(spec.p()));
  }
  const int feature = args.feature - 1;
  const EffectKind kind = ParseEffectKind(args.kind);
  const GridPtr grid = BuildGrid(spec, feature, args.grid);
  const NoiseCalibration cal =
      CalibrateNoise(spec, 5.0, 100000, DeriveSeed(args.seed, {HashTag("pilot")}));
  const Dataset data = SampleDataset(spec, args.n, cal, DeriveSeed(args.seed, {HashTag("data")}));
  const LearnerKind learner = ParseLearner(args.learner);
  const LearnerConfig config = PresetConfig(learner, ParseMode(args.mode), setting, args.n);
  StrategySpec strategy;
  strategy.kind = ParseStrategy(args.strategy);
  strategy.shuffle_seed = DeriveSeed(args.seed, {HashTag("shuffle")});
  const StrategyResult result =
      RunStrategy(config, data, strategy, kind, grid, DeriveSeed(args.seed, {HashTag("fit")}));
  const EffectCurve& curve = result.curve;
  std::cout << "x,value,se\n";
  for (const std::size_t g : grid->evaluated) {
    const auto gi = static_cast<Eigen::Index>(g);
    const double se = curve.standard_errors.size() > 0 ? curve.standard_errors(gi)
                                                       : std::numeric_limits<double>::quiet_NaN();
    std::cout << FormatDouble(grid->points[g]) << ',' << FormatDouble(curve.values(gi)) << ','
              << FormatDouble(se) << '\n';
  }
  if (curve.has_empty_bins()) std::cerr << "warning: some ALE bins were empty\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Feature effect estimation and error decomposition"};
  app.set_version_flag("--version", std::string(effektor::kVersion));
  app.require_subcommand(1);

  SimulateArgs sim;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a simulation protocol from a config");
  simulate->add_option("--config", sim.config, "JSON config file")->required();
  simulate->add_option("--rq", sim.rq, "Protocol: 1 error decomposition, 2 variance split, "
                                       "3 estimation error ladder")
      ->required()
      ->check(CLI::Range(1, 3));
  simulate->add_option("--out", sim.out, "Output directory")->required();
  simulate->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Override the master seed");

  EffectsArgs eff;
  CLI::App* effects = app.add_subcommand("effects", "Print one centered effect curve as CSV");
  effects->add_option("--setting", eff.setting, "SimpleNormalCorrelated, Friedman1 or Feynman12916")
      ->required();
  effects->add_option("--feature", eff.feature, "1-based feature index")->required();
  effects->add_option("--kind", eff.kind, "pd or ale")->required();
  effects->add_option("--n", eff.n, "Sample size")->required();
  effects->add_option("--seed", eff.seed, "Seed");
  effects->add_option("--grid", eff.grid, "Grid size");
  effects->add_option("--learner", eff.learner,
                      "GroundTruth, BoostedTrees, RidgeBasis or Linear");
  effects->add_option("--mode", eff.mode, "OT or OF");
  effects->add_option("--strategy", eff.strategy, "train, val or cv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }
  try {
    if (simulate->parsed()) return Simulate(sim);
    return Effects(eff);
  } catch (const effektor::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const effektor::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCellFailures;
  }
}
