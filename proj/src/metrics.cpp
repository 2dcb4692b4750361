#include "tech/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace tech {

namespace {

void require_both_classes(std::span<const int> labels, const char* op) {
  bool pos = false, neg = false;
  for (int l : labels) {
    if (l == 1) pos = true;
    else neg = true;
  }
  if (!pos || !neg) {
    throw std::invalid_argument(std::string(op) + ": needs both classes present");
  }
}

}  // namespace

double auroc_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("auroc_binary: size mismatch or empty input");
  }
  require_both_classes(labels, "auroc_binary");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double positive_rank_sum = 0.0;
  std::int64_t positives = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j));
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) {
        positive_rank_sum += avg_rank;
        ++positives;
      }
    }
    i = j;
  }
  const double p = static_cast<double>(positives);
  const double n = static_cast<double>(scores.size()) - p;
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double auprc_binary(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size() || scores.empty()) {
    throw std::invalid_argument("auprc_binary: size mismatch or empty input");
  }
  require_both_classes(labels, "auprc_binary");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  std::int64_t total_pos = 0;
  for (int l : labels) total_pos += l == 1 ? 1 : 0;

  double ap = 0.0, prev_recall = 0.0;
  std::int64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) ++tp;
      else ++fp;
    }
    const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

MetricsReport compute_metrics(const Tensor& scores, std::span<const int> labels) {
  if (scores.rank() != 2) throw std::invalid_argument("compute_metrics: scores must be [BxK]");
  const std::int64_t batch = scores.extent(0), classes = scores.extent(1);
  if (static_cast<std::int64_t>(labels.size()) != batch || batch == 0) {
    throw std::invalid_argument("compute_metrics: label count mismatch");
  }
  for (int l : labels) {
    if (l < 0 || l >= classes) throw std::invalid_argument("compute_metrics: label out of range");
  }

  std::vector<int> predicted(static_cast<std::size_t>(batch));
  for (std::int64_t b = 0; b < batch; ++b) {
    std::int64_t best = 0;
    for (std::int64_t k = 1; k < classes; ++k) {
      if (scores.at(b, k) > scores.at(b, best)) best = k;
    }
    predicted[static_cast<std::size_t>(b)] = static_cast<int>(best);
  }

  MetricsReport report;
  std::int64_t correct = 0;
  for (std::int64_t b = 0; b < batch; ++b) {
    correct += predicted[static_cast<std::size_t>(b)] == labels[static_cast<std::size_t>(b)] ? 1 : 0;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(batch);

  double precision_sum = 0.0, recall_sum = 0.0, f1_sum = 0.0;
  for (std::int64_t k = 0; k < classes; ++k) {
    std::int64_t tp = 0, fp = 0, fn = 0;
    for (std::int64_t b = 0; b < batch; ++b) {
      const bool is_true = labels[static_cast<std::size_t>(b)] == k;
      const bool is_pred = predicted[static_cast<std::size_t>(b)] == k;
      tp += is_true && is_pred ? 1 : 0;
      fp += !is_true && is_pred ? 1 : 0;
      fn += is_true && !is_pred ? 1 : 0;
    }
    const double precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
    precision_sum += precision;
    recall_sum += recall;
    f1_sum += f1;
  }
  report.precision_macro = precision_sum / static_cast<double>(classes);
  report.recall_macro = recall_sum / static_cast<double>(classes);
  report.f1_macro = f1_sum / static_cast<double>(classes);

  // one-vs-rest ranking metrics; classes without both a positive and a
  // negative example are undefined and get dropped
  double auroc_sum = 0.0, auprc_sum = 0.0;
  std::int64_t valid = 0;
  std::vector<double> class_scores(static_cast<std::size_t>(batch));
  std::vector<int> class_labels(static_cast<std::size_t>(batch));
  for (std::int64_t k = 0; k < classes; ++k) {
    std::int64_t pos = 0;
    for (std::int64_t b = 0; b < batch; ++b) {
      class_scores[static_cast<std::size_t>(b)] = scores.at(b, k);
      const int y = labels[static_cast<std::size_t>(b)] == k ? 1 : 0;
      class_labels[static_cast<std::size_t>(b)] = y;
      pos += y;
    }
    if (pos == 0 || pos == batch) {
      std::fprintf(stderr,
                   "[metrics] class %lld lacks %s examples; dropped from macro AUROC/AUPRC\n",
                   static_cast<long long>(k), pos == 0 ? "positive" : "negative");
      continue;
    }
    auroc_sum += auroc_binary(class_scores, class_labels);
    auprc_sum += auprc_binary(class_scores, class_labels);
    ++valid;
  }
  if (valid > 0) {
    report.auroc_macro = auroc_sum / static_cast<double>(valid);
    report.auprc_macro = auprc_sum / static_cast<double>(valid);
  } else {
    std::fprintf(stderr, "[metrics] no class had both outcomes; AUROC/AUPRC reported as 0\n");
  }
  return report;
}

SeedAggregate aggregate(std::span<const MetricsReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate: no reports");
  SeedAggregate out;
  out.per_seed.assign(reports.begin(), reports.end());

  auto fields = [](MetricsReport& r) {
    return std::array<double*, 6>{&r.accuracy, &r.precision_macro, &r.recall_macro,
                                  &r.f1_macro, &r.auroc_macro, &r.auprc_macro};
  };
  auto cfields = [](const MetricsReport& r) {
    return std::array<const double*, 6>{&r.accuracy, &r.precision_macro, &r.recall_macro,
                                        &r.f1_macro, &r.auroc_macro, &r.auprc_macro};
  };

  const double n = static_cast<double>(reports.size());
  auto mean_ptrs = fields(out.mean);
  for (const MetricsReport& r : reports) {
    auto src = cfields(r);
    for (std::size_t i = 0; i < 6; ++i) *mean_ptrs[i] += *src[i] / n;
  }
  if (reports.size() > 1) {
    auto std_ptrs = fields(out.stddev);
    for (const MetricsReport& r : reports) {
      auto src = cfields(r);
      for (std::size_t i = 0; i < 6; ++i) {
        const double d = *src[i] - *mean_ptrs[i];
        *std_ptrs[i] += d * d / (n - 1.0);
      }
    }
    for (std::size_t i = 0; i < 6; ++i) *std_ptrs[i] = std::sqrt(*std_ptrs[i]);
  }
  return out;
}

}  // namespace tech
