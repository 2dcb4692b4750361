#pragma once

#include <span>
#include <vector>

#include "tech/dataset.hpp"
#include "tech/tensor.hpp"

namespace tech {

struct MetricsReport {
  double accuracy = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double f1_macro = 0.0;
  double auroc_macro = 0.0;
  double auprc_macro = 0.0;
};

/// Rank-based AUROC: (concordant + 0.5 * tied) / (P * N), computed through
/// tie-averaged ranks. Both classes must be present.
double auroc_binary(std::span<const double> scores, std::span<const int> labels);

/// Average precision: one precision/recall step per distinct score
/// threshold, descending; AP = sum (R_t - R_{t-1}) * P_t.
double auprc_binary(std::span<const double> scores, std::span<const int> labels);

/// Full suite from a [BxK] score matrix and B true labels. Predictions are
/// per-row argmax (lowest index wins ties). Zero-division in per-class
/// precision/recall/F1 resolves to 0. Classes missing a positive or a
/// negative example are dropped from macro AUROC/AUPRC with a warning on
/// stderr.
MetricsReport compute_metrics(const Tensor& scores, std::span<const int> labels);

struct SeedAggregate {
  MetricsReport mean;
  MetricsReport stddev;  // sample standard deviation over seeds (n-1)
  std::vector<MetricsReport> per_seed;
};

SeedAggregate aggregate(std::span<const MetricsReport> reports);

/// Evaluates a classifier over a split: softmax scores per sample, dropout
/// off, no augmentation. Model needs forward(Graph&, x, training, rng).
template <typename Model>
MetricsReport evaluate(const Model& model, const Dataset& data) {
  if (data.samples.empty()) throw std::invalid_argument("evaluate: empty split");
  const std::int64_t batch = static_cast<std::int64_t>(data.samples.size());
  Tensor scores = Tensor::zeros({batch, data.classes});
  std::vector<int> labels(static_cast<std::size_t>(batch));
  for (std::int64_t i = 0; i < batch; ++i) {
    const LabeledSample& s = data.samples[static_cast<std::size_t>(i)];
    Graph g(false);
    Tensor probs = softmax(g, model.forward(g, s.x, false, nullptr), 0);
    for (std::int64_t k = 0; k < data.classes; ++k) scores.at(i, k) = probs.at(k);
    labels[static_cast<std::size_t>(i)] = s.label;
  }
  return compute_metrics(scores, labels);
}

}  // namespace tech
