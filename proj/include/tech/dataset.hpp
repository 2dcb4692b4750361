#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "tech/tensor.hpp"

namespace tech {

/// One trial: a [T x C] series with its class label and originating subject.
struct LabeledSample {
  Tensor x;
  int label = 0;
  int subject_id = 0;
};

struct Dataset {
  int timesteps = 0;
  int channels = 0;
  int classes = 0;
  std::vector<LabeledSample> samples;

  /// Sorted unique subject ids.
  std::vector<int> subject_ids() const;
  bool empty() const { return samples.empty(); }
};

struct SplitSpec {
  double train_frac = 0.6;
  double val_frac = 0.2;
  double test_frac = 0.2;
  std::uint64_t seed = 42;
  void validate() const;
};

struct DatasetSplits {
  Dataset train, val, test;
};

/// Shuffles subject ids with the configured seed, partitions them by the
/// given fractions (train absorbs the rounding remainder), then routes every
/// sample by its subject. No subject ever crosses splits.
DatasetSplits split_by_subject(const Dataset& data, const SplitSpec& spec);

/// k subject-level folds: each (train, test) pair is a partition of the
/// subjects, and every subject lands in exactly one test fold.
std::vector<std::pair<Dataset, Dataset>> kfold_by_subject(const Dataset& data, int k,
                                                          std::uint64_t seed);

// On-disk format (text, bit-exact round trip):
//   #medts v1 T=<T> C=<C> K=<K>
//   <subject_id>,<label>
//   <T lines of C comma-separated values>
//   ... repeated per sample
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

}  // namespace tech
