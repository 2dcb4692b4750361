#pragma once

#include <random>
#include <vector>

#include "tech/layers.hpp"
#include "tech/tensor.hpp"

namespace tech {

/// One post-norm transformer block with the mixing sublayer swappable:
///   y   = norm1(x + drop(mix(x)))
///   out = norm2(y + drop(ffn(y))),   ffn(y) = GELU(y W1 + b1) W2 + b2.
/// With pre_norm set, the norms move inside the residual branches instead.
struct EncoderBlock {
  Mixer mixer;
  Tensor ffn1_w, ffn1_b;  // D x H, H
  Tensor ffn2_w, ffn2_b;  // H x D, D
  Tensor norm1_gain, norm1_shift;
  Tensor norm2_gain, norm2_shift;
  double dropout_rate = 0.1;
  bool pre_norm = false;
  int model_dim = 0;
  int hidden_dim = 0;

  static EncoderBlock init(Mixer mixer, int model_dim, int hidden_dim, double dropout_rate,
                           bool pre_norm, std::mt19937_64& rng);
  std::vector<Tensor> parameters() const;
};

/// Dropout fires only when training is set; rng may be null otherwise.
Tensor block_forward(Graph& g, const EncoderBlock& block, const Tensor& tokens, bool training,
                     std::mt19937_64* rng = nullptr);

struct EncoderStack {
  std::vector<EncoderBlock> blocks;
  std::vector<Tensor> parameters() const;
};

/// depth blocks sharing one configuration; each gets its own parameters.
EncoderStack make_stack(int depth, MixerKind kind, int model_dim, int core_dim, int hidden_dim,
                        double dropout_rate, bool pre_norm, std::mt19937_64& rng);

/// Left-to-right composition; depth 0 is the identity.
Tensor stack_forward(Graph& g, const EncoderStack& stack, const Tensor& tokens, bool training,
                     std::mt19937_64* rng = nullptr);

}  // namespace tech
