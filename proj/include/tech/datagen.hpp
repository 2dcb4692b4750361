#pragma once

#include <cstdint>
#include <vector>

#include "tech/dataset.hpp"

namespace tech {

/// Centralized: every channel is a gain-scaled copy of one latent
/// class-frequency sinusoid plus white noise, mimicking a single driving
/// source. Decentralized: channels are independent AR(1) processes, each
/// carrying its own class-frequency tone at a channel-specific frequency
/// offset so the task stays learnable without any cross-channel structure.
enum class GeneratorMode { kCentralized, kDecentralized };

struct GeneratorSpec {
  GeneratorMode mode = GeneratorMode::kCentralized;
  int subjects = 12;
  int trials_per_subject = 10;
  int timesteps = 128;
  int channels = 8;
  int classes = 2;
  double coupling = 0.9;      // weight of the shared latent vs channel noise
  double noise_sigma = 0.3;   // white-noise level
  std::vector<double> class_frequencies = {0.05, 0.15};  // cycles per step
  std::uint64_t seed = 42;

  void validate() const;
};

/// Deterministic in the seed; every trial is standardized per channel
/// (mean 0, unit variance) before it is stored.
Dataset generate(const GeneratorSpec& spec);

/// In-place per-channel standardization of one [T x C] sample: zero mean,
/// unit variance; constant channels become zero.
void standardize_per_channel(Tensor& x);

}  // namespace tech
