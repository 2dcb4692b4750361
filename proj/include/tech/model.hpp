#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>

#include "tech/encoder.hpp"
#include "tech/layers.hpp"
#include "tech/tokenizer.hpp"

namespace tech {

struct TeChConfig {
  int timesteps = 0;
  int channels = 0;
  int classes = 0;
  int model_dim = 32;
  int core_dim = 0;    // 0 -> model_dim / 4
  int patch_len = 1;
  int temporal_depth = 1;  // encoder blocks on the patch tokens; 0 removes the branch
  int channel_depth = 1;   // encoder blocks on the channel tokens; 0 removes the branch
  int ffn_hidden = 0;  // 0 -> 2 * model_dim
  MixerKind mixer = MixerKind::kCoTAR;
  double dropout = 0.1;
  bool pre_norm = false;

  int resolved_core_dim() const;
  int resolved_ffn_hidden() const;
  int num_patches() const;
  /// Throws std::invalid_argument on any inconsistent field; in particular
  /// both depths at zero is rejected (that ablation is LinearProbe).
  void validate() const;
};

/// Dual-branch classifier: patch tokens and channel tokens each run through
/// their own encoder stack, are mean-pooled over the token axis, summed, and
/// mapped to class logits. A branch with depth 0 is absent and contributes
/// a zero vector.
struct TeChModel {
  TeChConfig config;
  std::optional<TemporalTokenizer> temporal_tokenizer;
  EncoderStack temporal_stack;
  std::optional<ChannelTokenizer> channel_tokenizer;
  EncoderStack channel_stack;
  Tensor head_w;  // D x K
  Tensor head_b;  // K

  static TeChModel init(const TeChConfig& config, std::uint64_t seed);

  /// All learned tensors in a fixed order: temporal tokenizer, temporal
  /// blocks, channel tokenizer, channel blocks, head. This order defines
  /// the checkpoint layout and the optimizer state alignment.
  std::vector<Tensor> parameters() const;
  std::int64_t parameter_count() const;

  Tensor forward(Graph& g, const Tensor& x, bool training = false,
                 std::mt19937_64* rng = nullptr) const;
  Tensor forward_batch(Graph& g, std::span<const Tensor> xs, bool training = false,
                       std::mt19937_64* rng = nullptr) const;
};

/// Mean-pooled output of one branch (temporal = true for the patch branch);
/// throws if that branch is absent.
Tensor pooled_branch_output(Graph& g, const TeChModel& m, const Tensor& x, bool temporal_branch,
                            bool training = false, std::mt19937_64* rng = nullptr);

/// Closed-form parameter count; matches parameter_count() exactly. With
/// D = model_dim, Dc = core width, H = ffn hidden, P = ceil(T/L), K classes,
/// M/N the branch depths and
///   block(D,Dc,H) = mixer + (DH + H + HD + D) + 4D,
///   mixer = 3D^2 + 3D                          (attention)
///         = 2D^2 + DDc + (D+Dc)D + 3D + Dc     (cotar), 0 for none:
/// count = M>0 ? (LCD + D + PD) + M*block : 0
///       + N>0 ? (TD + D + CD) + N*block : 0
///       + DK + K.
std::int64_t tech_parameter_count(const TeChConfig& config);

// Checkpoint layout (version 1, little-endian):
//   bytes 0..7  magic "TECHCKP1"
//   u32         byte length of the config JSON that follows
//   ...         config JSON (UTF-8)
//   u64         total number of parameter doubles
//   ...         raw IEEE-754 doubles, parameters in declaration order
// Round-tripping a model through save/load reproduces it bit for bit.
void save_checkpoint(const std::filesystem::path& path, const TeChModel& model);
TeChModel load_checkpoint(const std::filesystem::path& path);

/// The no-representation-learning ablation: flatten the raw series and
/// apply one affine map.
struct LinearProbe {
  int timesteps = 0, channels = 0, classes = 0;
  Tensor weight;  // (T*C) x K
  Tensor bias;    // K

  static LinearProbe init(int timesteps, int channels, int classes, std::uint64_t seed);
  std::vector<Tensor> parameters() const { return {weight, bias}; }
  Tensor forward(Graph& g, const Tensor& x, bool training = false,
                 std::mt19937_64* rng = nullptr) const;
  Tensor forward_batch(Graph& g, std::span<const Tensor> xs, bool training = false,
                       std::mt19937_64* rng = nullptr) const;
};

}  // namespace tech
