#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tech/dataset.hpp"
#include "tech/layers.hpp"

namespace tech {

/// Channels-by-timestamps view used by the analysis metrics.
struct SeriesMatrix {
  Tensor values;  // S x T

  static SeriesMatrix from_sample(const Tensor& x_tc);  // transposes a [TxC] sample
  std::int64_t channels() const { return values.extent(0); }
  std::int64_t timesteps() const { return values.extent(1); }
};

/// Spectral centralization: top eigenvalue of the channel covariance over
/// its trace. 1 for rank-1 signals, 1/S for isotropic ones. The eigenvalue
/// comes from power iteration (tolerance 1e-10, at most 10000 iterations,
/// deterministic start). All-zero input is an error.
double sci(const SeriesMatrix& series);

/// First-order VAR transition fit and its column out-strengths.
struct VarModel {
  Tensor transition;                 // S x S, maps x_t -> x_{t+1}
  std::vector<double> out_strengths; // s_i = sum_j |A_ji|
  double mean_strength = 0.0;
};

struct DicResult {
  double value = 0.0;  // (max_i s_i - mean) / mean
  VarModel model;
};

/// Fits x_{t+1} ~ A x_t by ridge-regularized least squares (lambda = 1e-8)
/// and returns the normalized out-strength imbalance. Needs T >= S + 2 and
/// non-degenerate history energy.
DicResult dic(const SeriesMatrix& series);

/// Copy of the dataset with beta * N(0,1) noise added to the last channel
/// of every sample; the realization depends only on (seed, sample index),
/// never on downstream consumers.
Dataset add_channel_noise(const Dataset& data, double beta, std::uint64_t seed);

struct NoiseSweepPoint {
  double beta = 0.0;
  MixerKind mixer = MixerKind::kCoTAR;
  double f1 = 0.0;
};

/// Callback contract: train on the perturbed dataset with the given mixer
/// and report test macro-F1.
using SweepTrainFn = std::function<double(const Dataset& perturbed, MixerKind mixer)>;

/// Runs the trainer at every (beta, mixer) pair. Each beta perturbs the
/// dataset once, so competing mixers see identical noise.
std::vector<NoiseSweepPoint> noise_sweep(const SweepTrainFn& train_fn, const Dataset& data,
                                         std::span<const double> betas,
                                         std::span<const MixerKind> mixers,
                                         std::uint64_t noise_seed = 1234);

/// The default beta grid spanning 0 to 20.
std::vector<double> default_beta_grid();

}  // namespace tech
