#include "tech/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>

#include "tech/tensor.hpp"

namespace tech {

double fit_loglog_slope(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("fit_loglog_slope: need at least two points");
  }
  const double n = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double lx = std::log(xs[i]);
    const double ly = std::log(ys[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

std::vector<std::int64_t> default_token_grid() { return {128, 256, 512, 1024, 2048}; }

namespace {

struct TimedStats {
  double median_ms = 0.0;
  GraphStats stats;
};

template <typename Forward>
TimedStats time_mixer(const Forward& forward, const Tensor& tokens, int reps) {
  GraphStats recorded;
  {
    Graph warm;  // warmup; also the instrumented run for the counters
    Tensor out = forward(warm, tokens);
    Tensor loss = reduce_sum(warm, reduce_sum(warm, out, 0), 0);
    recorded = warm.stats();
    warm.backward(loss);
  }
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(reps));
  for (int r = 0; r < reps; ++r) {
    const auto start = std::chrono::steady_clock::now();
    Graph g;
    Tensor out = forward(g, tokens);
    Tensor loss = reduce_sum(g, reduce_sum(g, out, 0), 0);
    g.backward(loss);
    const auto stop = std::chrono::steady_clock::now();
    times.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
  }
  std::sort(times.begin(), times.end());
  return {times[times.size() / 2], recorded};
}

}  // namespace

BenchResult run_bench(std::span<const std::int64_t> token_grid, int dim, int reps,
                      std::uint64_t seed) {
  if (token_grid.empty()) throw std::invalid_argument("run_bench: empty token grid");
  if (reps < 1) throw std::invalid_argument("run_bench: reps must be >= 1");
  std::mt19937_64 rng(seed);
  const int core = default_core_dim(dim);
  AttentionLayer attention = AttentionLayer::init(dim, rng);
  CoTARLayer cotar = CoTARLayer::init(dim, core, rng);

  BenchResult result;
  std::vector<double> sizes, attention_times, cotar_times;
  for (std::int64_t s : token_grid) {
    Tensor tokens = Tensor::uniform({s, dim}, -1.0, 1.0, rng, true);
    sizes.push_back(static_cast<double>(s));

    auto att = time_mixer(
        [&](Graph& g, const Tensor& x) { return attention_forward(g, attention, x); }, tokens,
        reps);
    attention_times.push_back(att.median_ms);
    result.rows.push_back({MixerKind::kAttention, s, dim, att.median_ms, att.stats.forward_macs,
                           attention_interaction_mac_count(s, dim), att.stats.peak_live_elements,
                           att.stats.max_single_tensor});

    auto cot = time_mixer(
        [&](Graph& g, const Tensor& x) { return cotar_forward(g, cotar, x); }, tokens, reps);
    cotar_times.push_back(cot.median_ms);
    result.rows.push_back({MixerKind::kCoTAR, s, dim, cot.median_ms, cot.stats.forward_macs, 0,
                           cot.stats.peak_live_elements, cot.stats.max_single_tensor});
  }
  if (token_grid.size() >= 2) {
    result.attention_slope = fit_loglog_slope(sizes, attention_times);
    result.cotar_slope = fit_loglog_slope(sizes, cotar_times);
  }
  return result;
}

}  // namespace tech
