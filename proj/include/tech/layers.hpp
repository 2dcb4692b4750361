#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "tech/tensor.hpp"

namespace tech {

/// Which token mixer an encoder block uses. kNone passes tokens through
/// unchanged (the "no interaction" ablation mode).
enum class MixerKind { kAttention, kCoTAR, kNone };

const char* mixer_name(MixerKind kind);
MixerKind mixer_from_name(const std::string& name);

/// Uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)]; biases start at zero.
Tensor init_weight(std::vector<std::int64_t> shape, std::int64_t fan_in, std::mt19937_64& rng);

/// Single-head scaled dot-product attention over a token matrix:
///   Q = X Wq + bq,  K = X Wk + bk,  V = X Wv + bv,
///   out = softmax(Q K^T / sqrt(D), per row) V.
struct AttentionLayer {
  Tensor query_w, key_w, value_w;  // D x D
  Tensor query_b, key_b, value_b;  // D
  int model_dim = 0;

  static AttentionLayer init(int model_dim, std::mt19937_64& rng);
  std::vector<Tensor> parameters() const;
};

/// Centralized mixer: projects tokens to per-dimension scores, aggregates a
/// single core vector as a softmax-weighted sum over tokens, tiles it back
/// to every token, and fuses through a second two-layer map:
///   F = GELU(X W1 + b1) W2 + b2                    (S x Dc)
///   W = softmax(F, over tokens)                    (S x Dc)
///   core = sum_tokens(F .* W)                      (Dc)
///   out = GELU([X | tile(core)] W3 + b3) W4 + b4   (S x D)
/// No intermediate ever has S^2 elements.
struct CoTARLayer {
  Tensor proj1_w, proj1_b;  // D x D, D
  Tensor proj2_w, proj2_b;  // D x Dc, Dc
  Tensor fuse1_w, fuse1_b;  // (D+Dc) x D, D
  Tensor fuse2_w, fuse2_b;  // D x D, D
  int model_dim = 0;
  int core_dim = 0;

  static CoTARLayer init(int model_dim, int core_dim, std::mt19937_64& rng);
  std::vector<Tensor> parameters() const;
};

/// Default core width: a quarter of the model width, at least 1.
int default_core_dim(int model_dim);

Tensor attention_forward(Graph& g, const AttentionLayer& layer, const Tensor& tokens);
Tensor cotar_forward(Graph& g, const CoTARLayer& layer, const Tensor& tokens);
/// The aggregated core vector alone (exposed for analysis).
Tensor core_token(Graph& g, const CoTARLayer& layer, const Tensor& tokens);

/// A mixer choice plus its parameters; the stored layer must match `kind`.
struct Mixer {
  MixerKind kind = MixerKind::kNone;
  std::optional<AttentionLayer> attention;
  std::optional<CoTARLayer> cotar;

  static Mixer none();
  static Mixer make_attention(int model_dim, std::mt19937_64& rng);
  static Mixer make_cotar(int model_dim, int core_dim, std::mt19937_64& rng);
  std::vector<Tensor> parameters() const;
};

/// Dispatches on kind; kNone returns the input unchanged.
Tensor mix(Graph& g, const Mixer& m, const Tensor& tokens);

// Exact forward multiply-accumulate counts (sum of m*k*n over the matmuls
// each forward executes); these match the graph counter exactly.
std::int64_t attention_mac_count(std::int64_t tokens, std::int64_t dim);
/// MACs of the two token-by-token products (Q K^T and weights V): the
/// quadratic part, 2*S^2*D exactly.
std::int64_t attention_interaction_mac_count(std::int64_t tokens, std::int64_t dim);
std::int64_t cotar_mac_count(std::int64_t tokens, std::int64_t dim, std::int64_t core_dim);

}  // namespace tech
