#pragma once

#include <random>
#include <vector>

#include "tech/tensor.hpp"

namespace tech {

enum class Augmentation {
  kTemporalFlip,    // reverse the time axis (prob)
  kChannelShuffle,  // permute channels (prob)
  kTemporalMask,    // zero floor(ratio*T) whole timestamps
  kFrequencyMask,   // zero random frequency bins per channel
  kJitter,          // add scale * U(0,1) noise
  kValueDropout,    // zero individual entries with prob ratio
};

/// Training-time augmentation menu: apply() draws one enabled entry
/// uniformly, then that augmentation fires with its own prob/ratio.
struct AugmentBank {
  std::vector<Augmentation> enabled;
  double flip_prob = 0.5;
  double shuffle_prob = 0.5;
  double temporal_mask_ratio = 0.1;
  double frequency_mask_ratio = 0.1;
  double jitter_scale = 0.1;
  double dropout_ratio = 0.1;

  void validate() const;
  static AugmentBank all_defaults();
};

/// Empty bank returns the input unchanged; every augmentation preserves the
/// [T x C] shape.
Tensor apply(const AugmentBank& bank, const Tensor& x, std::mt19937_64& rng);

Tensor temporal_flip(const Tensor& x);
Tensor channel_shuffle(const Tensor& x, std::mt19937_64& rng);
/// Zeroes exactly floor(ratio*T) distinct timestamps across all channels.
Tensor temporal_mask(const Tensor& x, double ratio, std::mt19937_64& rng);
/// Per channel: DFT, zero floor(ratio*(T/2+1)) random bins (with their
/// conjugate mirrors), inverse DFT. Direct O(T^2) transform.
Tensor frequency_mask(const Tensor& x, double ratio, std::mt19937_64& rng);
Tensor jitter(const Tensor& x, double scale, std::mt19937_64& rng);
Tensor value_dropout(const Tensor& x, double ratio, std::mt19937_64& rng);

}  // namespace tech
