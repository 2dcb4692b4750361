#include "tech/encoder.hpp"

#include <stdexcept>

namespace tech {

EncoderBlock EncoderBlock::init(Mixer mixer, int model_dim, int hidden_dim, double dropout_rate,
                                bool pre_norm, std::mt19937_64& rng) {
  if (model_dim < 1 || hidden_dim < 1) {
    throw std::invalid_argument("EncoderBlock: dims must be >= 1");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw std::invalid_argument("EncoderBlock: dropout must be in [0,1)");
  }
  EncoderBlock b;
  b.mixer = std::move(mixer);
  b.model_dim = model_dim;
  b.hidden_dim = hidden_dim;
  b.dropout_rate = dropout_rate;
  b.pre_norm = pre_norm;
  const std::int64_t d = model_dim, h = hidden_dim;
  b.ffn1_w = init_weight({d, h}, d, rng);
  b.ffn1_b = Tensor::zeros({h}, true);
  b.ffn2_w = init_weight({h, d}, h, rng);
  b.ffn2_b = Tensor::zeros({d}, true);
  b.norm1_gain = Tensor::full({d}, 1.0, true);
  b.norm1_shift = Tensor::zeros({d}, true);
  b.norm2_gain = Tensor::full({d}, 1.0, true);
  b.norm2_shift = Tensor::zeros({d}, true);
  return b;
}

std::vector<Tensor> EncoderBlock::parameters() const {
  std::vector<Tensor> ps = mixer.parameters();
  for (const Tensor& t : {ffn1_w, ffn1_b, ffn2_w, ffn2_b, norm1_gain, norm1_shift, norm2_gain,
                          norm2_shift}) {
    ps.push_back(t);
  }
  return ps;
}

namespace {

Tensor maybe_dropout(Graph& g, const Tensor& x, const EncoderBlock& b, bool training,
                     std::mt19937_64* rng) {
  if (!training || b.dropout_rate == 0.0) return x;
  if (!rng) throw std::invalid_argument("block_forward: training with dropout needs an rng");
  return dropout(g, x, b.dropout_rate, *rng);
}

Tensor ffn(Graph& g, const EncoderBlock& b, const Tensor& x) {
  Tensor hidden = gelu(g, add_bias(g, matmul(g, x, b.ffn1_w), b.ffn1_b));
  return add_bias(g, matmul(g, hidden, b.ffn2_w), b.ffn2_b);
}

}  // namespace

Tensor block_forward(Graph& g, const EncoderBlock& block, const Tensor& tokens, bool training,
                     std::mt19937_64* rng) {
  if (tokens.rank() != 2 || tokens.extent(1) != block.model_dim) {
    throw std::invalid_argument("block_forward: expected [Sx" + std::to_string(block.model_dim) +
                                "] tokens, got " + shape_str(tokens.shape()));
  }
  if (block.pre_norm) {
    Tensor mixed = mix(g, block.mixer, layer_norm(g, tokens, block.norm1_gain, block.norm1_shift));
    Tensor midway = add(g, tokens, maybe_dropout(g, mixed, block, training, rng));
    Tensor lifted = ffn(g, block, layer_norm(g, midway, block.norm2_gain, block.norm2_shift));
    return add(g, midway, maybe_dropout(g, lifted, block, training, rng));
  }
  Tensor mixed = maybe_dropout(g, mix(g, block.mixer, tokens), block, training, rng);
  Tensor midway = layer_norm(g, add(g, tokens, mixed), block.norm1_gain, block.norm1_shift);
  Tensor lifted = maybe_dropout(g, ffn(g, block, midway), block, training, rng);
  return layer_norm(g, add(g, midway, lifted), block.norm2_gain, block.norm2_shift);
}

EncoderStack make_stack(int depth, MixerKind kind, int model_dim, int core_dim, int hidden_dim,
                        double dropout_rate, bool pre_norm, std::mt19937_64& rng) {
  if (depth < 0) throw std::invalid_argument("make_stack: depth must be >= 0");
  EncoderStack stack;
  stack.blocks.reserve(static_cast<std::size_t>(depth));
  for (int i = 0; i < depth; ++i) {
    Mixer m;
    switch (kind) {
      case MixerKind::kAttention: m = Mixer::make_attention(model_dim, rng); break;
      case MixerKind::kCoTAR: m = Mixer::make_cotar(model_dim, core_dim, rng); break;
      case MixerKind::kNone: m = Mixer::none(); break;
    }
    stack.blocks.push_back(
        EncoderBlock::init(std::move(m), model_dim, hidden_dim, dropout_rate, pre_norm, rng));
  }
  return stack;
}

std::vector<Tensor> EncoderStack::parameters() const {
  std::vector<Tensor> ps;
  for (const EncoderBlock& b : blocks) {
    for (Tensor& t : b.parameters()) ps.push_back(std::move(t));
  }
  return ps;
}

Tensor stack_forward(Graph& g, const EncoderStack& stack, const Tensor& tokens, bool training,
                     std::mt19937_64* rng) {
  Tensor out = tokens;
  for (const EncoderBlock& b : stack.blocks) out = block_forward(g, b, out, training, rng);
  return out;
}

}  // namespace tech
