#include "tech/augment.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <stdexcept>

namespace tech {

void AugmentBank::validate() const {
  for (double p : {flip_prob, shuffle_prob, temporal_mask_ratio, frequency_mask_ratio,
                   dropout_ratio}) {
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("augment: probabilities/ratios in [0,1]");
  }
  if (jitter_scale < 0.0) throw std::invalid_argument("augment: jitter scale must be >= 0");
}

AugmentBank AugmentBank::all_defaults() {
  AugmentBank bank;
  bank.enabled = {Augmentation::kTemporalFlip,  Augmentation::kChannelShuffle,
                  Augmentation::kTemporalMask,  Augmentation::kFrequencyMask,
                  Augmentation::kJitter,        Augmentation::kValueDropout};
  return bank;
}

namespace {

void require_sample(const Tensor& x) {
  if (x.rank() != 2) {
    throw std::invalid_argument("augment: expected a [TxC] sample, got " + shape_str(x.shape()));
  }
}

}  // namespace

Tensor temporal_flip(const Tensor& x) {
  require_sample(x);
  const std::int64_t t = x.extent(0), c = x.extent(1);
  Tensor out = Tensor::zeros(x.shape());
  for (std::int64_t i = 0; i < t; ++i) {
    for (std::int64_t j = 0; j < c; ++j) out.at(i, j) = x.at(t - 1 - i, j);
  }
  return out;
}

Tensor channel_shuffle(const Tensor& x, std::mt19937_64& rng) {
  require_sample(x);
  const std::int64_t t = x.extent(0), c = x.extent(1);
  std::vector<std::int64_t> perm(static_cast<std::size_t>(c));
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Tensor out = Tensor::zeros(x.shape());
  for (std::int64_t i = 0; i < t; ++i) {
    for (std::int64_t j = 0; j < c; ++j) out.at(i, j) = x.at(i, perm[static_cast<std::size_t>(j)]);
  }
  return out;
}

Tensor temporal_mask(const Tensor& x, double ratio, std::mt19937_64& rng) {
  require_sample(x);
  if (ratio < 0.0 || ratio > 1.0) throw std::invalid_argument("temporal_mask: ratio in [0,1]");
  const std::int64_t t = x.extent(0), c = x.extent(1);
  const std::int64_t count = static_cast<std::int64_t>(ratio * static_cast<double>(t));

  std::vector<std::int64_t> rows(static_cast<std::size_t>(t));
  std::iota(rows.begin(), rows.end(), 0);
  // partial Fisher-Yates: the first `count` entries are the masked rows
  for (std::int64_t i = 0; i < count; ++i) {
    std::uniform_int_distribution<std::int64_t> pick(i, t - 1);
    std::swap(rows[static_cast<std::size_t>(i)], rows[static_cast<std::size_t>(pick(rng))]);
  }
  Tensor out = x.clone();
  for (std::int64_t i = 0; i < count; ++i) {
    for (std::int64_t j = 0; j < c; ++j) out.at(rows[static_cast<std::size_t>(i)], j) = 0.0;
  }
  return out;
}

Tensor frequency_mask(const Tensor& x, double ratio, std::mt19937_64& rng) {
  require_sample(x);
  if (ratio < 0.0 || ratio > 1.0) throw std::invalid_argument("frequency_mask: ratio in [0,1]");
  const std::int64_t t = x.extent(0), c = x.extent(1);
  const std::int64_t bins = t / 2 + 1;
  const std::int64_t count = static_cast<std::int64_t>(ratio * static_cast<double>(bins));

  Tensor out = Tensor::zeros(x.shape());
  const double tau = 2.0 * M_PI;
  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(t));
  std::vector<std::int64_t> bin_ids(static_cast<std::size_t>(bins));
  for (std::int64_t j = 0; j < c; ++j) {
    for (std::int64_t k = 0; k < t; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (std::int64_t i = 0; i < t; ++i) {
        const double angle = -tau * static_cast<double>(k) * static_cast<double>(i) /
                             static_cast<double>(t);
        acc += x.at(i, j) * std::complex<double>(std::cos(angle), std::sin(angle));
      }
      spectrum[static_cast<std::size_t>(k)] = acc;
    }
    std::iota(bin_ids.begin(), bin_ids.end(), 0);
    for (std::int64_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::int64_t> pick(i, bins - 1);
      std::swap(bin_ids[static_cast<std::size_t>(i)], bin_ids[static_cast<std::size_t>(pick(rng))]);
    }
    for (std::int64_t i = 0; i < count; ++i) {
      const std::int64_t k = bin_ids[static_cast<std::size_t>(i)];
      spectrum[static_cast<std::size_t>(k)] = 0.0;
      if (k != 0 && 2 * k != t) spectrum[static_cast<std::size_t>(t - k)] = 0.0;  // mirror
    }
    for (std::int64_t i = 0; i < t; ++i) {
      std::complex<double> acc(0.0, 0.0);
      for (std::int64_t k = 0; k < t; ++k) {
        const double angle = tau * static_cast<double>(k) * static_cast<double>(i) /
                             static_cast<double>(t);
        acc += spectrum[static_cast<std::size_t>(k)] *
               std::complex<double>(std::cos(angle), std::sin(angle));
      }
      out.at(i, j) = acc.real() / static_cast<double>(t);
    }
  }
  return out;
}

Tensor jitter(const Tensor& x, double scale, std::mt19937_64& rng) {
  require_sample(x);
  if (scale < 0.0) throw std::invalid_argument("jitter: scale must be >= 0");
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Tensor out = x.clone();
  for (double& v : out.data()) v += scale * dist(rng);
  return out;
}

Tensor value_dropout(const Tensor& x, double ratio, std::mt19937_64& rng) {
  require_sample(x);
  if (ratio < 0.0 || ratio > 1.0) throw std::invalid_argument("value_dropout: ratio in [0,1]");
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  Tensor out = x.clone();
  for (double& v : out.data()) {
    if (dist(rng) < ratio) v = 0.0;
  }
  return out;
}

Tensor apply(const AugmentBank& bank, const Tensor& x, std::mt19937_64& rng) {
  bank.validate();
  if (bank.enabled.empty()) return x;
  std::uniform_int_distribution<std::size_t> pick(0, bank.enabled.size() - 1);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  switch (bank.enabled[pick(rng)]) {
    case Augmentation::kTemporalFlip:
      return coin(rng) < bank.flip_prob ? temporal_flip(x) : x;
    case Augmentation::kChannelShuffle:
      return coin(rng) < bank.shuffle_prob ? channel_shuffle(x, rng) : x;
    case Augmentation::kTemporalMask:
      return temporal_mask(x, bank.temporal_mask_ratio, rng);
    case Augmentation::kFrequencyMask:
      return frequency_mask(x, bank.frequency_mask_ratio, rng);
    case Augmentation::kJitter:
      return jitter(x, bank.jitter_scale, rng);
    case Augmentation::kValueDropout:
      return value_dropout(x, bank.dropout_ratio, rng);
  }
  return x;
}

}  // namespace tech
