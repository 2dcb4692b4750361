#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tech/layers.hpp"

namespace tech {

struct BenchRow {
  MixerKind mixer = MixerKind::kCoTAR;
  std::int64_t tokens = 0;
  std::int64_t dim = 0;
  double median_ms = 0.0;               // forward+backward wall time
  std::int64_t mac_total = 0;           // forward matmul MACs (graph counter)
  std::int64_t mac_quadratic = 0;       // the exact S^2 part of the count
  std::int64_t peak_live_elements = 0;  // accountant peak during forward
  std::int64_t max_single_tensor = 0;   // largest intermediate
};

struct BenchResult {
  std::vector<BenchRow> rows;
  double attention_slope = 0.0;  // fitted log-log wall-time slope
  double cotar_slope = 0.0;
};

/// Least-squares slope of log(y) against log(x).
double fit_loglog_slope(std::span<const double> xs, std::span<const double> ys);

std::vector<std::int64_t> default_token_grid();  // {128, 256, 512, 1024, 2048}

/// Times forward+backward of each mixer over the token grid: one warmup
/// run, then `reps` timed runs per point, median reported. Core width is
/// dim/4. Counts come from the instrumented warmup run.
BenchResult run_bench(std::span<const std::int64_t> token_grid, int dim, int reps = 5,
                      std::uint64_t seed = 42);

}  // namespace tech
