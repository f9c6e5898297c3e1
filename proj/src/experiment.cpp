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

#include "effektor/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <mutex>
#include <string>
#include <thread>

#include "effektor/dgp.hpp"
#include "effektor/effects.hpp"
#include "effektor/error.hpp"
#include "effektor/learners.hpp"
#include "effektor/random.hpp"
#include "effektor/strategies.hpp"

namespace effektor {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct CellIndex {
  std::size_t learner;
  std::size_t strategy;
  std::size_t kind;
  std::size_t feature;
};

class CellLayout {
 public:
  explicit CellLayout(const ExperimentConfig& cfg)
      : nl_(cfg.learners.size()),
        ns_(cfg.strategies.size()),
        nk_(cfg.kinds.size()),
        nf_(cfg.ResolvedFeatures().size()) {}

  std::size_t size() const { return nl_ * ns_ * nk_ * nf_; }
  std::size_t Flat(std::size_t l, std::size_t s, std::size_t k, std::size_t f) const {
    return ((l * ns_ + s) * nk_ + k) * nf_ + f;
  }
  CellIndex Split(std::size_t c) const {
    CellIndex idx{};
    idx.feature = c % nf_;
    c /= nf_;
    idx.kind = c % nk_;
    c /= nk_;
    idx.strategy = c % ns_;
    idx.learner = c / ns_;
    return idx;
  }

 private:
  std::size_t nl_, ns_, nk_, nf_;
};

// Outcome of one repetition for every cell.
struct RepetitionSlot {
  std::vector<bool> ok;
  std::vector<bool> empty_bins;
  std::vector<Vector> curve;
  std::vector<Eigen::MatrixXd> repeats;
};

struct RunContext {
  const ExperimentConfig& cfg;
  DgpSpec spec;
  NoiseCalibration cal;
  std::vector<int> features;
  std::vector<GridPtr> grids;
  CellLayout layout;
};

std::uint64_t RepSeed(const ExperimentConfig& cfg, std::size_t m) {
  return DeriveSeed(cfg.master_seed, {HashTag("rep"), m});
}

void RunRepetition(const RunContext& ctx, std::size_t m, bool with_repeats,
                   RepetitionSlot& slot) {
  const ExperimentConfig& cfg = ctx.cfg;
  const std::size_t cells = ctx.layout.size();
  const auto g_eval = static_cast<Eigen::Index>(ctx.grids.front()->evaluated.size());
  slot.ok.assign(cells, false);
  slot.empty_bins.assign(cells, false);
  slot.curve.assign(cells, Vector());
  slot.repeats.assign(cells, Eigen::MatrixXd());

  const std::uint64_t rep_seed = RepSeed(cfg, m);
  const Dataset data =
      SampleDataset(ctx.spec, cfg.n, ctx.cal, DeriveSeed(rep_seed, {HashTag("data")}));
  for (std::size_t l = 0; l < cfg.learners.size(); ++l) {
    const LearnerConfig learner =
        PresetConfig(cfg.learners[l].learner, cfg.learners[l].mode, cfg.setting, cfg.n);
    for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
      StrategySpec strategy;
      strategy.kind = cfg.strategies[s];
      strategy.folds = cfg.folds;
      strategy.split_fraction = cfg.split_fraction;
      strategy.shuffle_seed = DeriveSeed(rep_seed, {HashTag("shuffle")});
      FittedStrategy fitted;
      try {
        fitted = FitStrategy(learner, data, strategy, DeriveSeed(rep_seed, {HashTag("fit"), l}));
      } catch (const Error&) {
        continue;
      }
      const std::vector<Dataset> sets = EstimationSets(fitted, data);
      for (std::size_t k = 0; k < cfg.kinds.size(); ++k) {
        for (std::size_t f = 0; f < ctx.features.size(); ++f) {
          const std::size_t c = ctx.layout.Flat(l, s, k, f);
          try {
            const EffectCurve curve =
                EstimateStrategyEffect(fitted, sets, cfg.kinds[k], ctx.grids[f]);
            slot.curve[c] = curve.Evaluated();
            slot.empty_bins[c] = curve.has_empty_bins();
            slot.ok[c] = true;
          } catch (const Error&) {
          }
          if (with_repeats && slot.ok[c]) slot.repeats[c].resize(static_cast<Eigen::Index>(cfg.R), g_eval);
        }
      }
      if (!with_repeats) continue;
      for (std::size_t r = 0; r < cfg.R; ++r) {
        const std::vector<Dataset> fresh = FreshEstimationSets(
            fitted, ctx.spec, DeriveSeed(rep_seed, {HashTag("repeat"), l, s, r}));
        for (std::size_t k = 0; k < cfg.kinds.size(); ++k) {
          for (std::size_t f = 0; f < ctx.features.size(); ++f) {
            const std::size_t c = ctx.layout.Flat(l, s, k, f);
            if (!slot.ok[c]) continue;
            try {
              const EffectCurve curve =
                  EstimateStrategyEffect(fitted, fresh, cfg.kinds[k], ctx.grids[f]);
              slot.repeats[c].row(static_cast<Eigen::Index>(r)) = curve.Evaluated().transpose();
            } catch (const Error&) {
              slot.ok[c] = false;
            }
          }
        }
      }
    }
  }
}

RunContext MakeContext(const ExperimentConfig& cfg) {
  cfg.Validate();
  DgpSpec spec = DgpSpec::Make(cfg.setting);
  const NoiseCalibration cal = CalibrateNoise(spec, cfg.snr, cfg.pilot_n,
                                              DeriveSeed(cfg.master_seed, {HashTag("pilot")}));
  std::vector<int> features = cfg.ResolvedFeatures();
  std::vector<GridPtr> grids;
  for (const int f : features) grids.push_back(BuildGrid(spec, f, cfg.G));
  return RunContext{cfg, std::move(spec), cal, std::move(features), std::move(grids),
                    CellLayout(cfg)};
}

std::string JoinFlags(std::initializer_list<std::pair<const char*, std::size_t>> items) {
  std::string out;
  for (const auto& [key, count] : items) {
    if (count == 0) continue;
    if (!out.empty()) out += '|';
    out += std::string(key) + ':' + std::to_string(count);
  }
  return out;
}

ResultRow MakeRow(const CellEnsemble& cell, std::string metric,
                  const Vector& values, double aggregate, std::string flags,
                  std::string status) {
  const CurveMetadata& meta = cell.ensemble.meta;
  ResultRow row;
  row.setting = meta.setting;
  row.n = meta.n;
  row.learner = meta.learner.substr(0, meta.learner.find('_'));
  row.mode = meta.learner.substr(meta.learner.find('_') + 1);
  row.strategy = meta.strategy;
  row.kind = std::string(EffectKindName(meta.kind));
  row.feature = meta.feature + 1;
  row.metric = std::move(metric);
  row.M = cell.ensemble.M();
  row.R = cell.ensemble.R();
  row.aggregate = aggregate;
  row.flags = std::move(flags);
  row.status = std::move(status);
  row.values.assign(values.data(), values.data() + values.size());
  return row;
}

std::string CellStatus(const CellEnsemble& cell, bool usable) {
  if (!usable) return "failed";
  return cell.failures > 0 ? "incomplete" : "complete";
}

}  // namespace

void ParallelFor(std::size_t count, std::size_t threads,
                 const std::function<void(std::size_t)>& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (std::size_t t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

std::vector<CellEnsemble> BuildEnsembles(const ExperimentConfig& cfg, bool with_repeats,
                                         const RunOptions& opts) {
  const RunContext ctx = MakeContext(cfg);
  const std::size_t cells = ctx.layout.size();

  // One truth curve per (kind, feature), shared by all repetitions.
  std::vector<Vector> truth(cfg.kinds.size() * ctx.features.size());
  ParallelFor(truth.size(), opts.threads, [&](std::size_t t) {
    const std::size_t k = t / ctx.features.size();
    const std::size_t f = t % ctx.features.size();
    truth[t] = EstimateGroundTruthEffect(
                   ctx.spec, cfg.kinds[k], ctx.grids[f], cfg.n_gt,
                   DeriveSeed(cfg.master_seed, {HashTag("truth"), k, f}))
                   .Evaluated();
  });

  std::vector<RepetitionSlot> slots(cfg.M);
  ParallelFor(cfg.M, opts.threads,
              [&](std::size_t m) { RunRepetition(ctx, m, with_repeats, slots[m]); });

  std::vector<CellEnsemble> out(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    const CellIndex idx = ctx.layout.Split(c);
    CellEnsemble& cell = out[c];
    CurveEnsemble& ens = cell.ensemble;
    const LearnerEntry& le = cfg.learners[idx.learner];
    ens.meta.setting = std::string(SettingName(cfg.setting));
    ens.meta.learner = std::string(LearnerName(le.learner)) + "_" + std::string(ModeName(le.mode));
    ens.meta.strategy = std::string(StrategyName(cfg.strategies[idx.strategy]));
    ens.meta.feature = ctx.features[idx.feature];
    ens.meta.kind = cfg.kinds[idx.kind];
    ens.meta.n = cfg.n;
    ens.truth = truth[idx.kind * ctx.features.size() + idx.feature];

    std::vector<std::size_t> good;
    for (std::size_t m = 0; m < cfg.M; ++m) {
      if (slots[m].ok[c]) {
        good.push_back(m);
      } else {
        ++cell.failures;
      }
    }
    ens.curves.resize(static_cast<Eigen::Index>(good.size()), ens.truth.size());
    for (std::size_t j = 0; j < good.size(); ++j) {
      ens.curves.row(static_cast<Eigen::Index>(j)) = slots[good[j]].curve[c].transpose();
      if (slots[good[j]].empty_bins[c]) ++cell.curves_with_empty_bins;
      if (with_repeats) ens.repeats.push_back(slots[good[j]].repeats[c]);
    }
  }
  return out;
}

RunOutput RunRq1(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunOutput out;
  for (const CellEnsemble& cell : BuildEnsembles(cfg, false, opts)) {
    const bool usable = cell.ensemble.M() >= 2;
    const std::string status = CellStatus(cell, usable);
    const std::string flags = JoinFlags({{"fit_failures", cell.failures},
                                         {"empty_bins", cell.curves_with_empty_bins}});
    if (status != "complete") ++out.incomplete_cells;
    if (!usable) {
      const Vector nan = Vector::Constant(cell.ensemble.truth.size(), kNaN);
      for (const char* metric : {"mse", "bias", "var"}) {
        out.rows.push_back(MakeRow(cell, metric, nan, kNaN, flags, status));
      }
      continue;
    }
    const ErrorReport report = Decompose(cell.ensemble);
    out.rows.push_back(MakeRow(cell, "mse", report.mse, report.mse_agg, flags, status));
    out.rows.push_back(MakeRow(cell, "bias", report.bias, report.bias_agg, flags, status));
    out.rows.push_back(MakeRow(cell, "var", report.var, report.var_agg, flags, status));
  }
  return out;
}

RunOutput RunRq2(const ExperimentConfig& cfg, const RunOptions& opts) {
  RunOutput out;
  for (const CellEnsemble& cell : BuildEnsembles(cfg, true, opts)) {
    const bool usable = cell.ensemble.M() >= 2;
    const std::string status = CellStatus(cell, usable);
    if (status != "complete") ++out.incomplete_cells;
    if (!usable) {
      const std::string flags = JoinFlags({{"fit_failures", cell.failures}});
      const Vector nan = Vector::Constant(cell.ensemble.truth.size(), kNaN);
      for (const char* metric : {"var_tot", "var_model", "var_est"}) {
        out.rows.push_back(MakeRow(cell, metric, nan, kNaN, flags, status));
      }
      continue;
    }
    const ErrorReport report = Decompose(cell.ensemble);
    const auto missing = static_cast<std::size_t>(
        std::count(report.var_model_missing.begin(), report.var_model_missing.end(), true));
    const std::string flags = JoinFlags({{"fit_failures", cell.failures},
                                         {"empty_bins", cell.curves_with_empty_bins},
                                         {"var_model_missing", missing}});
    out.rows.push_back(MakeRow(cell, "var_tot", report.var, report.var_agg, flags, status));
    out.rows.push_back(
        MakeRow(cell, "var_model", report.var_model, report.var_model_agg, flags, status));
    out.rows.push_back(
        MakeRow(cell, "var_est", report.var_est, report.var_est_agg, flags, status));
  }
  return out;
}

RunOutput RunRq3(const ExperimentConfig& cfg, const RunOptions& opts) {
  cfg.Validate();
  if (cfg.setting == Setting::kFeynman12916) {
    throw ConfigError("the estimation-error sweep needs a setting with closed-form effects");
  }
  const DgpSpec spec = DgpSpec::Make(cfg.setting);
  const ModelPtr truth_model = MakeGroundTruthModel(spec);
  const std::vector<int> features = cfg.ResolvedFeatures();
  std::vector<GridPtr> grids;
  for (const int f : features) grids.push_back(BuildGrid(spec, f, cfg.G));
  const std::size_t nk = cfg.kinds.size();
  const std::size_t nf = features.size();
  std::vector<Vector> analytic(nk * nf);
  for (std::size_t k = 0; k < nk; ++k) {
    for (std::size_t f = 0; f < nf; ++f) {
      analytic[k * nf + f] = AnalyticEvaluated(spec, cfg.kinds[k], *grids[f]);
    }
  }

  const std::size_t reps = cfg.rq3_repetitions;
  const std::size_t tasks = cfg.rq3_sizes.size() * reps;
  // Squared error per (task, kind, feature) and an empty-bin marker.
  std::vector<std::vector<Vector>> sq_error(tasks);
  std::vector<std::vector<bool>> empty(tasks);
  ParallelFor(tasks, opts.threads, [&](std::size_t t) {
    const std::size_t n = cfg.rq3_sizes[t / reps];
    const std::size_t rep = t % reps;
    Dataset data;
    data.setting = cfg.setting;
    data.seed = DeriveSeed(cfg.master_seed, {HashTag("rq3"), n, rep});
    data.features = SampleFeatures(spec, n, data.seed);
    data.target = Vector::Zero(data.features.rows());
    sq_error[t].resize(nk * nf);
    empty[t].assign(nk * nf, false);
    for (std::size_t k = 0; k < nk; ++k) {
      for (std::size_t f = 0; f < nf; ++f) {
        const EffectCurve curve =
            CenterCurve(EstimateEffect(*truth_model, data, cfg.kinds[k], grids[f]));
        sq_error[t][k * nf + f] = (curve.Evaluated() - analytic[k * nf + f]).array().square();
        empty[t][k * nf + f] = curve.has_empty_bins();
      }
    }
  });

  RunOutput out;
  for (std::size_t si = 0; si < cfg.rq3_sizes.size(); ++si) {
    for (std::size_t k = 0; k < nk; ++k) {
      for (std::size_t f = 0; f < nf; ++f) {
        const std::size_t cell = k * nf + f;
        Vector mean = Vector::Zero(grids[f]->evaluated.size() == 0
                                       ? 0
                                       : static_cast<Eigen::Index>(grids[f]->evaluated.size()));
        std::size_t empties = 0;
        for (std::size_t rep = 0; rep < reps; ++rep) {
          mean += sq_error[si * reps + rep][cell];
          if (empty[si * reps + rep][cell]) ++empties;
        }
        mean /= static_cast<double>(reps);
        ResultRow row;
        row.setting = std::string(SettingName(cfg.setting));
        row.n = cfg.rq3_sizes[si];
        row.learner = "GroundTruth";
        row.mode = "-";
        row.strategy = "-";
        row.kind = std::string(EffectKindName(cfg.kinds[k]));
        row.feature = features[f] + 1;
        row.metric = "estimation_error";
        row.M = reps;
        row.R = 0;
        row.aggregate = Aggregate(mean);
        row.flags = JoinFlags({{"empty_bins", empties}});
        row.status = "complete";
        row.values.assign(mean.data(), mean.data() + mean.size());
        out.rows.push_back(std::move(row));
      }
    }
  }
  return out;
}

}  // namespace effektor
