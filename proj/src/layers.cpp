#include "tech/layers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace tech {

namespace {

void require_tokens(const char* op, const Tensor& tokens, int model_dim) {
  if (tokens.rank() != 2 || tokens.extent(1) != model_dim) {
    throw std::invalid_argument(std::string(op) + ": expected [Sx" + std::to_string(model_dim) +
                                "] tokens, got " + shape_str(tokens.shape()));
  }
}

}  // namespace

const char* mixer_name(MixerKind kind) {
  switch (kind) {
    case MixerKind::kAttention: return "attention";
    case MixerKind::kCoTAR: return "cotar";
    case MixerKind::kNone: return "none";
  }
  return "?";
}

MixerKind mixer_from_name(const std::string& name) {
  if (name == "attention") return MixerKind::kAttention;
  if (name == "cotar") return MixerKind::kCoTAR;
  if (name == "none") return MixerKind::kNone;
  throw std::invalid_argument("unknown mixer '" + name + "' (attention|cotar|none)");
}

Tensor init_weight(std::vector<std::int64_t> shape, std::int64_t fan_in, std::mt19937_64& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  return Tensor::uniform(std::move(shape), -bound, bound, rng, true);
}

int default_core_dim(int model_dim) { return std::max(1, model_dim / 4); }

// --- Attention -----------------------------------------------------------

AttentionLayer AttentionLayer::init(int model_dim, std::mt19937_64& rng) {
  if (model_dim < 1) throw std::invalid_argument("AttentionLayer: model_dim must be >= 1");
  AttentionLayer l;
  l.model_dim = model_dim;
  const std::int64_t d = model_dim;
  l.query_w = init_weight({d, d}, d, rng);
  l.key_w = init_weight({d, d}, d, rng);
  l.value_w = init_weight({d, d}, d, rng);
  l.query_b = Tensor::zeros({d}, true);
  l.key_b = Tensor::zeros({d}, true);
  l.value_b = Tensor::zeros({d}, true);
  return l;
}

std::vector<Tensor> AttentionLayer::parameters() const {
  return {query_w, query_b, key_w, key_b, value_w, value_b};
}

Tensor attention_forward(Graph& g, const AttentionLayer& layer, const Tensor& tokens) {
  require_tokens("attention_forward", tokens, layer.model_dim);
  Tensor q = add_bias(g, matmul(g, tokens, layer.query_w), layer.query_b);
  Tensor k = add_bias(g, matmul(g, tokens, layer.key_w), layer.key_b);
  Tensor v = add_bias(g, matmul(g, tokens, layer.value_w), layer.value_b);
  Tensor scores = scale(g, matmul(g, q, transpose(g, k)),
                        1.0 / std::sqrt(static_cast<double>(layer.model_dim)));
  Tensor weights = softmax(g, scores, 1);  // each row a distribution over tokens
  return matmul(g, weights, v);
}

// --- CoTAR -----------------------------------------------------------------

CoTARLayer CoTARLayer::init(int model_dim, int core_dim, std::mt19937_64& rng) {
  if (model_dim < 1) throw std::invalid_argument("CoTARLayer: model_dim must be >= 1");
  if (core_dim < 1) throw std::invalid_argument("CoTARLayer: core_dim must be >= 1");
  CoTARLayer l;
  l.model_dim = model_dim;
  l.core_dim = core_dim;
  const std::int64_t d = model_dim, dc = core_dim;
  l.proj1_w = init_weight({d, d}, d, rng);
  l.proj1_b = Tensor::zeros({d}, true);
  l.proj2_w = init_weight({d, dc}, d, rng);
  l.proj2_b = Tensor::zeros({dc}, true);
  l.fuse1_w = init_weight({d + dc, d}, d + dc, rng);
  l.fuse1_b = Tensor::zeros({d}, true);
  l.fuse2_w = init_weight({d, d}, d, rng);
  l.fuse2_b = Tensor::zeros({d}, true);
  return l;
}

std::vector<Tensor> CoTARLayer::parameters() const {
  return {proj1_w, proj1_b, proj2_w, proj2_b, fuse1_w, fuse1_b, fuse2_w, fuse2_b};
}

namespace {

/// Aggregation half: per-dimension scores and their softmax-weighted sum
/// over the token axis.
Tensor aggregate_core(Graph& g, const CoTARLayer& layer, const Tensor& tokens) {
  Tensor hidden = gelu(g, add_bias(g, matmul(g, tokens, layer.proj1_w), layer.proj1_b));
  Tensor features = add_bias(g, matmul(g, hidden, layer.proj2_w), layer.proj2_b);
  Tensor weights = softmax(g, features, 0);  // one distribution per core dimension
  return reduce_sum(g, mul(g, features, weights), 0);
}

}  // namespace

Tensor cotar_forward(Graph& g, const CoTARLayer& layer, const Tensor& tokens) {
  require_tokens("cotar_forward", tokens, layer.model_dim);
  const std::int64_t s = tokens.extent(0);
  Tensor core = aggregate_core(g, layer, tokens);
  Tensor tiled = repeat_rows(g, core, s);
  Tensor joined = concat(g, tokens, tiled, 1);
  Tensor fused = gelu(g, add_bias(g, matmul(g, joined, layer.fuse1_w), layer.fuse1_b));
  return add_bias(g, matmul(g, fused, layer.fuse2_w), layer.fuse2_b);
}

Tensor core_token(Graph& g, const CoTARLayer& layer, const Tensor& tokens) {
  require_tokens("core_token", tokens, layer.model_dim);
  return aggregate_core(g, layer, tokens);
}

// --- Dispatch ---------------------------------------------------------------

Mixer Mixer::none() {
  Mixer m;
  m.kind = MixerKind::kNone;
  return m;
}

Mixer Mixer::make_attention(int model_dim, std::mt19937_64& rng) {
  Mixer m;
  m.kind = MixerKind::kAttention;
  m.attention = AttentionLayer::init(model_dim, rng);
  return m;
}

Mixer Mixer::make_cotar(int model_dim, int core_dim, std::mt19937_64& rng) {
  Mixer m;
  m.kind = MixerKind::kCoTAR;
  m.cotar = CoTARLayer::init(model_dim, core_dim, rng);
  return m;
}

std::vector<Tensor> Mixer::parameters() const {
  switch (kind) {
    case MixerKind::kAttention: return attention ? attention->parameters() : std::vector<Tensor>{};
    case MixerKind::kCoTAR: return cotar ? cotar->parameters() : std::vector<Tensor>{};
    case MixerKind::kNone: return {};
  }
  return {};
}

Tensor mix(Graph& g, const Mixer& m, const Tensor& tokens) {
  switch (m.kind) {
    case MixerKind::kAttention:
      if (!m.attention) throw std::invalid_argument("mix: kind is attention but no layer is set");
      return attention_forward(g, *m.attention, tokens);
    case MixerKind::kCoTAR:
      if (!m.cotar) throw std::invalid_argument("mix: kind is cotar but no layer is set");
      return cotar_forward(g, *m.cotar, tokens);
    case MixerKind::kNone:
      return tokens;
  }
  throw std::invalid_argument("mix: unknown kind");
}

// --- Cost accounting ----------------------------------------------------------

std::int64_t attention_mac_count(std::int64_t tokens, std::int64_t dim) {
  return 3 * tokens * dim * dim + attention_interaction_mac_count(tokens, dim);
}

std::int64_t attention_interaction_mac_count(std::int64_t tokens, std::int64_t dim) {
  return 2 * tokens * tokens * dim;
}

std::int64_t cotar_mac_count(std::int64_t tokens, std::int64_t dim, std::int64_t core_dim) {
  // W1, W2, W3, W4 products; everything is per-token.
  return tokens * (dim * dim + dim * core_dim + (dim + core_dim) * dim + dim * dim);
}

}  // namespace tech
