#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tech/augment.hpp"
#include "tech/datagen.hpp"
#include "tech/dataset.hpp"
#include "tech/model.hpp"
#include "tech/trainer.hpp"

namespace tech {

/// Flat run configuration: one JSON document drives every subcommand.
/// Unknown keys are rejected; --set key=value overrides file values.
struct RunConfig {
  // generator
  std::string mode = "centralized";  // or "decentralized"
  int subjects = 60;
  int trials_per_subject = 20;
  int timesteps = 128;
  int channels = 8;
  int classes = 2;
  double coupling = 0.9;
  double noise_sigma = 0.3;
  std::vector<double> class_frequencies = {0.05, 0.15};
  std::uint64_t gen_seed = 42;

  // split
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  std::uint64_t split_seed = 42;

  // model
  int model_dim = 32;
  int core_dim = 0;
  int patch_len = 16;
  int temporal_depth = 2;
  int channel_depth = 2;
  int ffn_hidden = 0;
  std::string mixer = "cotar";
  double dropout = 0.1;
  bool pre_norm = false;

  // training
  double lr = 1e-4;
  int batch_size = 32;
  int max_epochs = 100;
  int patience = 10;
  std::vector<std::uint64_t> seeds = {42, 43, 44, 45, 46};
  bool augment = false;
  std::vector<std::string> augmentations = {"temporal_flip", "channel_shuffle", "temporal_mask",
                                            "frequency_mask", "jitter", "value_dropout"};
  double aug_flip_prob = 0.5;
  double aug_shuffle_prob = 0.5;
  double aug_temporal_mask_ratio = 0.1;
  double aug_frequency_mask_ratio = 0.1;
  double aug_jitter_scale = 0.1;
  double aug_dropout_ratio = 0.1;

  // bench
  std::vector<std::int64_t> bench_tokens = {128, 256, 512, 1024, 2048};
  int bench_dim = 64;
  int bench_reps = 5;

  // analyze
  bool analyze_sweep = false;
  std::vector<double> sweep_betas = {0.0, 2.5, 5.0, 7.5, 10.0, 12.5, 15.0, 17.5, 20.0};

  // paths
  std::string data_path;
  std::string checkpoint_path;

  static RunConfig from_file(const std::filesystem::path& path);
  static RunConfig from_json_text(const std::string& text);
  /// key=value pairs; values are parsed as JSON when possible, else strings.
  void apply_overrides(const std::vector<std::string>& overrides);
  std::string to_json_text() const;

  GeneratorSpec generator_spec() const;
  SplitSpec split_spec() const;
  TeChConfig model_config() const;
  TrainConfig train_config() const;
  AugmentBank augment_bank() const;
};

}  // namespace tech
