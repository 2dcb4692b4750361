#include "tech/centrality.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "tech/rng.hpp"

namespace tech {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Eigen::Map<const RowMat> as_mat(const Tensor& t) {
  return {t.data().data(), t.extent(0), t.extent(1)};
}

}  // namespace

SeriesMatrix SeriesMatrix::from_sample(const Tensor& x_tc) {
  if (x_tc.rank() != 2) {
    throw std::invalid_argument("SeriesMatrix: expected a [TxC] sample, got " +
                                shape_str(x_tc.shape()));
  }
  const std::int64_t t = x_tc.extent(0), c = x_tc.extent(1);
  Tensor values = Tensor::zeros({c, t});
  for (std::int64_t i = 0; i < t; ++i) {
    for (std::int64_t j = 0; j < c; ++j) values.at(j, i) = x_tc.at(i, j);
  }
  return {values};
}

double sci(const SeriesMatrix& series) {
  const std::int64_t s = series.channels(), t = series.timesteps();
  if (t < 2) throw std::invalid_argument("sci: need at least 2 timestamps");

  RowMat x = as_mat(series.values);
  const Eigen::VectorXd row_means = x.rowwise().mean();
  x.colwise() -= row_means;
  RowMat cov = (x * x.transpose()) / static_cast<double>(t - 1);
  const double trace = cov.trace();
  if (!(trace > 0.0)) throw std::invalid_argument("sci: zero-variance input, SCI undefined");
  cov /= trace;  // the ratio is scale-free; iterate on the normalized matrix

  // Power iteration with a fixed seeded start; the covariance is PSD so the
  // Rayleigh quotient increases monotonically to the top eigenvalue.
  std::mt19937_64 rng(0x5eed0001ULL);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Eigen::VectorXd v(s);
  for (std::int64_t i = 0; i < s; ++i) v[i] = dist(rng);
  v.normalize();

  double lambda = 0.0;
  for (int iter = 0; iter < 10000; ++iter) {
    Eigen::VectorXd w = cov * v;
    const double norm = w.norm();
    if (norm == 0.0) break;  // start vector landed in the kernel
    v = w / norm;
    const double next = v.dot(cov * v);
    if (std::abs(next - lambda) <= 1e-10) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return lambda;
}

DicResult dic(const SeriesMatrix& series) {
  const std::int64_t s = series.channels(), t = series.timesteps();
  if (t < s + 2) throw std::invalid_argument("dic: need T >= S + 2 timestamps");

  const RowMat x = as_mat(series.values);
  const RowMat past = x.leftCols(t - 1);    // x_1 .. x_{T-1}
  const RowMat future = x.rightCols(t - 1); // x_2 .. x_T

  RowMat gram = past * past.transpose();
  if (gram.trace() < 1e-12) throw std::invalid_argument("dic: degenerate history, no energy to fit");
  constexpr double kRidge = 1e-8;
  gram.diagonal().array() += kRidge;

  // A = (future past^T) gram^-1, via the symmetric solve of the transpose.
  const RowMat cross = future * past.transpose();
  const RowMat transition = gram.llt().solve(cross.transpose()).transpose();

  DicResult result;
  result.model.transition = Tensor::zeros({s, s});
  for (std::int64_t i = 0; i < s; ++i) {
    for (std::int64_t j = 0; j < s; ++j) result.model.transition.at(i, j) = transition(i, j);
  }
  result.model.out_strengths.resize(static_cast<std::size_t>(s));
  double mean = 0.0, top = 0.0;
  for (std::int64_t i = 0; i < s; ++i) {
    const double strength = transition.col(i).cwiseAbs().sum();
    result.model.out_strengths[static_cast<std::size_t>(i)] = strength;
    mean += strength;
    top = std::max(top, strength);
  }
  mean /= static_cast<double>(s);
  result.model.mean_strength = mean;
  result.value = mean > 1e-300 ? (top - mean) / mean : 0.0;
  return result;
}

Dataset add_channel_noise(const Dataset& data, double beta, std::uint64_t seed) {
  Dataset out;
  out.timesteps = data.timesteps;
  out.channels = data.channels;
  out.classes = data.classes;
  out.samples.reserve(data.samples.size());
  const std::int64_t last = data.channels - 1;
  for (std::size_t i = 0; i < data.samples.size(); ++i) {
    LabeledSample s = data.samples[i];
    s.x = s.x.clone();
    auto rng = make_rng(seed, i);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::int64_t t = 0; t < data.timesteps; ++t) s.x.at(t, last) += beta * noise(rng);
    out.samples.push_back(std::move(s));
  }
  return out;
}

std::vector<NoiseSweepPoint> noise_sweep(const SweepTrainFn& train_fn, const Dataset& data,
                                         std::span<const double> betas,
                                         std::span<const MixerKind> mixers,
                                         std::uint64_t noise_seed) {
  if (betas.empty()) throw std::invalid_argument("noise_sweep: empty beta grid");
  if (betas.front() != 0.0) throw std::invalid_argument("noise_sweep: grid must start at 0");
  if (!std::is_sorted(betas.begin(), betas.end())) {
    throw std::invalid_argument("noise_sweep: betas must be sorted");
  }
  std::vector<NoiseSweepPoint> points;
  points.reserve(betas.size() * mixers.size());
  for (double beta : betas) {
    const Dataset perturbed = add_channel_noise(data, beta, noise_seed);
    for (MixerKind mixer : mixers) {
      points.push_back({beta, mixer, train_fn(perturbed, mixer)});
    }
  }
  return points;
}

std::vector<double> default_beta_grid() {
  return {0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0};
}

}  // namespace tech
