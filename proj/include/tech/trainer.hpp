#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "tech/augment.hpp"
#include "tech/dataset.hpp"
#include "tech/metrics.hpp"
#include "tech/rng.hpp"
#include "tech/tensor.hpp"

namespace tech {

struct AdamConfig {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Adam with bias correction; moments are owned here, aligned with the
/// parameter list passed at construction.
class AdamOptimizer {
 public:
  explicit AdamOptimizer(std::vector<Tensor> params, AdamConfig cfg = {});
  void zero_grad();
  void step();
  std::int64_t step_count() const { return steps_; }

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> first_moment_, second_moment_;
  AdamConfig cfg_;
  std::int64_t steps_ = 0;
};

struct TrainConfig {
  double lr = 1e-4;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 10;  // epochs without a new best validation F1
  std::vector<std::uint64_t> seeds = {42, 43, 44, 45, 46};
  bool augment = false;
  AugmentBank bank = AugmentBank::all_defaults();

  void validate() const;
};

struct EpochLog {
  int epoch = 0;
  double train_loss = 0.0;
  double val_f1 = 0.0;
  double lr = 0.0;
  std::int64_t elapsed_ms = 0;
};

struct TrainResult {
  double best_val_f1 = -1.0;
  int best_epoch = -1;
  int epochs_run = 0;
  std::vector<EpochLog> log;
};

/// One training run. Shuffling, augmentation, and dropout all draw from a
/// single generator derived from `seed`, so a rerun reproduces the
/// trajectory exactly. Keeps the parameters of the best-validation-F1
/// epoch and restores them before returning. Stops after `patience`
/// epochs without improvement or at max_epochs. Validation and test paths
/// never see augmentation. Throws on a non-finite loss.
template <typename Model>
TrainResult train(Model& model, const DatasetSplits& splits, const TrainConfig& cfg,
                  std::uint64_t seed) {
  cfg.validate();
  if (splits.train.samples.empty() || splits.val.samples.empty()) {
    throw std::invalid_argument("train: empty train or validation split");
  }

  std::vector<Tensor> params = model.parameters();
  AdamOptimizer opt(params, AdamConfig{.lr = cfg.lr});
  std::mt19937_64 run_rng = make_rng(seed, 0x7261696eULL);  // shuffle + augment + dropout

  std::vector<std::size_t> order(splits.train.samples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<std::vector<double>> best_params;
  auto snapshot = [&]() {
    best_params.clear();
    for (Tensor& p : params) best_params.emplace_back(p.data().begin(), p.data().end());
  };

  TrainResult result;
  int stale_epochs = 0;
  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const auto started = std::chrono::steady_clock::now();
    std::shuffle(order.begin(), order.end(), run_rng);

    double loss_sum = 0.0;
    std::size_t seen = 0;
    for (std::size_t base = 0; base < order.size(); base += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t stop = std::min(order.size(), base + static_cast<std::size_t>(cfg.batch_size));
      std::vector<Tensor> xs;
      std::vector<int> ys;
      xs.reserve(stop - base);
      for (std::size_t i = base; i < stop; ++i) {
        const LabeledSample& s = splits.train.samples[order[i]];
        xs.push_back(cfg.augment ? apply(cfg.bank, s.x, run_rng) : s.x);
        ys.push_back(s.label);
      }
      Graph g;
      Tensor logits = model.forward_batch(g, xs, true, &run_rng);
      Tensor loss = softmax_cross_entropy(g, logits, ys);
      if (!std::isfinite(loss.item())) {
        throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) +
                                 ", batch " + std::to_string(base / cfg.batch_size));
      }
      loss_sum += loss.item() * static_cast<double>(stop - base);
      seen += stop - base;
      opt.zero_grad();
      g.backward(loss);
      opt.step();
    }

    const double val_f1 = evaluate(model, splits.val).f1_macro;
    const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
        std::chrono::steady_clock::now() - started);
    result.log.push_back({epoch, loss_sum / static_cast<double>(seen), val_f1, cfg.lr,
                          elapsed.count()});
    result.epochs_run = epoch;

    if (val_f1 > result.best_val_f1) {
      result.best_val_f1 = val_f1;
      result.best_epoch = epoch;
      stale_epochs = 0;
      snapshot();
    } else if (++stale_epochs >= cfg.patience) {
      break;
    }
  }

  for (std::size_t i = 0; i < params.size(); ++i) {
    std::copy(best_params[i].begin(), best_params[i].end(), params[i].data().begin());
  }
  return result;
}

struct SeedRun {
  std::uint64_t seed = 0;
  TrainResult train_result;
  MetricsReport test_metrics;
};

struct MultiSeedOutcome {
  std::vector<SeedRun> runs;
  SeedAggregate summary;
};

/// Trains one fresh model per configured seed and aggregates test metrics.
/// `make_model` maps a seed to an initialized model.
template <typename MakeModel>
MultiSeedOutcome train_seeds(MakeModel&& make_model, const DatasetSplits& splits,
                             const TrainConfig& cfg) {
  cfg.validate();
  MultiSeedOutcome outcome;
  std::vector<MetricsReport> reports;
  for (std::uint64_t seed : cfg.seeds) {
    auto model = make_model(seed);
    SeedRun run;
    run.seed = seed;
    run.train_result = train(model, splits, cfg, seed);
    run.test_metrics = evaluate(model, splits.test);
    reports.push_back(run.test_metrics);
    outcome.runs.push_back(std::move(run));
  }
  outcome.summary = aggregate(reports);
  return outcome;
}

}  // namespace tech
