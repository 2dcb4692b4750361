#pragma once

#include <filesystem>

#include "tech/config.hpp"

namespace tech {

// Subcommand bodies behind the CLI; each writes its outputs under out_dir
// (created if missing), echoes the effective config to out_dir/config.json,
// and returns a process exit code. Failures print one "error: ..." line to
// stderr and return nonzero.

int cmd_generate(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_train(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_eval(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_bench(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_analyze(const RunConfig& config, const std::filesystem::path& out_dir);
int cmd_gradcheck(const RunConfig& config, const std::filesystem::path& out_dir);

// Emitted file schemas (all versioned by their fixed header row / keys):
//   log.csv        epoch,train_loss,val_f1,lr,elapsed_ms
//   bench.csv      mixer,tokens,dim,median_ms,mac_total,mac_quadratic,peak_live_elements,max_single_tensor
//   sweep.csv      beta,mixer,f1
//   metrics.json   {"<metric>_mean","<metric>_std","<metric>_per_seed",...,"seeds"}
//   centrality.json{"sci","dic","out_strengths","samples"}
extern const char* kTrainLogHeader;
extern const char* kBenchCsvHeader;
extern const char* kSweepCsvHeader;

}  // namespace tech
