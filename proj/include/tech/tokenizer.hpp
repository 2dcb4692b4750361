#pragma once

#include <random>
#include <vector>

#include "tech/tensor.hpp"

namespace tech {

/// Splits the time axis into ceil(T/L) patches of L consecutive timestamps
/// (all channels), flattens each patch row-major, and maps it through one
/// affine layer plus a learned per-patch position table. The trailing
/// partial patch, when T % L != 0, is zero-padded.
struct TemporalTokenizer {
  int timesteps = 0, channels = 0, patch_len = 0, num_patches = 0;
  Tensor weight;    // (L*C) x D
  Tensor bias;      // D
  Tensor position;  // P x D

  static TemporalTokenizer init(int timesteps, int channels, int patch_len, int model_dim,
                                std::mt19937_64& rng);
  std::vector<Tensor> parameters() const { return {weight, bias, position}; }
};

/// One token per channel: the channel's full series through an affine map
/// plus a learned per-channel position table.
struct ChannelTokenizer {
  int timesteps = 0, channels = 0;
  Tensor weight;    // T x D
  Tensor bias;      // D
  Tensor position;  // C x D

  static ChannelTokenizer init(int timesteps, int channels, int model_dim, std::mt19937_64& rng);
  std::vector<Tensor> parameters() const { return {weight, bias, position}; }
};

/// The patch gather alone: [TxC] -> [P x L*C], zero-padding the tail.
Tensor extract_patches(Graph& g, const Tensor& x, int patch_len);

Tensor temporal_embed(Graph& g, const TemporalTokenizer& tk, const Tensor& x);
Tensor channel_embed(Graph& g, const ChannelTokenizer& tk, const Tensor& x);

}  // namespace tech
