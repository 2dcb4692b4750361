#include "tech/commands.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "tech/bench.hpp"
#include "tech/centrality.hpp"
#include "tech/trainer.hpp"

namespace tech {

using nlohmann::json;

const char* kTrainLogHeader = "epoch,train_loss,val_f1,lr,elapsed_ms";
const char* kBenchCsvHeader =
    "mixer,tokens,dim,median_ms,mac_total,mac_quadratic,peak_live_elements,max_single_tensor";
const char* kSweepCsvHeader = "beta,mixer,f1";

namespace {

void echo_config(const RunConfig& config, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  std::ofstream out(out_dir / "config.json");
  out << config.to_json_text();
}

template <typename Body>
int guarded(const RunConfig& config, const std::filesystem::path& out_dir, Body&& body) {
  try {
    echo_config(config, out_dir);
    body();
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_train_log(const std::filesystem::path& path, const std::vector<EpochLog>& log) {
  std::ofstream out(path);
  out << kTrainLogHeader << "\n";
  for (const EpochLog& row : log) {
    out << row.epoch << ',' << format_double(row.train_loss) << ',' << format_double(row.val_f1)
        << ',' << format_double(row.lr) << ',' << row.elapsed_ms << "\n";
  }
}

json metrics_json(const std::vector<std::uint64_t>& seeds, const SeedAggregate& agg) {
  auto collect = [&](auto pick) {
    json arr = json::array();
    for (const MetricsReport& r : agg.per_seed) arr.push_back(pick(r));
    return arr;
  };
  json doc;
  struct Entry {
    const char* name;
    double MetricsReport::* member;
  };
  const Entry entries[] = {
      {"accuracy", &MetricsReport::accuracy},
      {"precision_macro", &MetricsReport::precision_macro},
      {"recall_macro", &MetricsReport::recall_macro},
      {"f1_macro", &MetricsReport::f1_macro},
      {"auroc_macro", &MetricsReport::auroc_macro},
      {"auprc_macro", &MetricsReport::auprc_macro},
  };
  for (const Entry& e : entries) {
    doc[std::string(e.name) + "_mean"] = agg.mean.*(e.member);
    doc[std::string(e.name) + "_std"] = agg.stddev.*(e.member);
    doc[std::string(e.name) + "_per_seed"] = collect([&](const MetricsReport& r) { return r.*(e.member); });
  }
  doc["seeds"] = seeds;
  return doc;
}

Dataset load_configured_dataset(const RunConfig& config) {
  if (config.data_path.empty()) {
    throw std::invalid_argument("data_path is required (generate a dataset first)");
  }
  return load_dataset(config.data_path);
}

}  // namespace

int cmd_generate(const RunConfig& config, const std::filesystem::path& out_dir) {
  return guarded(config, out_dir, [&] {
    Dataset data = generate(config.generator_spec());
    const std::filesystem::path path =
        config.data_path.empty() ? out_dir / "data.csv" : std::filesystem::path(config.data_path);
    save_dataset(path, data);
    std::cout << "wrote " << path.string() << " (" << data.samples.size() << " samples)\n";
  });
}

int cmd_train(const RunConfig& config, const std::filesystem::path& out_dir) {
  return guarded(config, out_dir, [&] {
    Dataset data = load_configured_dataset(config);
    DatasetSplits splits = split_by_subject(data, config.split_spec());
    const TrainConfig train_cfg = config.train_config();
    TeChConfig model_cfg = config.model_config();
    model_cfg.timesteps = data.timesteps;
    model_cfg.channels = data.channels;
    model_cfg.classes = data.classes;

    std::vector<MetricsReport> reports;
    bool first = true;
    for (std::uint64_t seed : train_cfg.seeds) {
      TeChModel model = TeChModel::init(model_cfg, seed);
      TrainResult result = train(model, splits, train_cfg, seed);
      reports.push_back(evaluate(model, splits.test));

      const std::string tag = "seed" + std::to_string(seed);
      save_checkpoint(out_dir / ("model_" + tag + ".ckpt"), model);
      write_train_log(out_dir / ("log_" + tag + ".csv"), result.log);
      if (first) {
        save_checkpoint(out_dir / "model.ckpt", model);
        write_train_log(out_dir / "log.csv", result.log);
        first = false;
      }
      std::cout << tag << ": best val F1 " << result.best_val_f1 << " at epoch "
                << result.best_epoch << " (" << result.epochs_run << " epochs)\n";
    }
    std::ofstream metrics(out_dir / "metrics.json");
    metrics << metrics_json(train_cfg.seeds, aggregate(reports)).dump(2) << "\n";
    std::cout << "test f1_macro mean " << aggregate(reports).mean.f1_macro << "\n";
  });
}

int cmd_eval(const RunConfig& config, const std::filesystem::path& out_dir) {
  return guarded(config, out_dir, [&] {
    if (config.checkpoint_path.empty()) {
      throw std::invalid_argument("checkpoint_path is required for eval");
    }
    TeChModel model = load_checkpoint(config.checkpoint_path);
    Dataset data = load_configured_dataset(config);
    DatasetSplits splits = split_by_subject(data, config.split_spec());
    MetricsReport report = evaluate(model, splits.test);
    // a single fixed checkpoint: one pseudo-seed entry keeps the schema uniform
    std::vector<MetricsReport> one = {report};
    std::ofstream metrics(out_dir / "metrics.json");
    metrics << metrics_json({0}, aggregate(one)).dump(2) << "\n";
    std::cout << "test accuracy " << report.accuracy << ", f1_macro " << report.f1_macro << "\n";
  });
}

int cmd_bench(const RunConfig& config, const std::filesystem::path& out_dir) {
  return guarded(config, out_dir, [&] {
    BenchResult result = run_bench(config.bench_tokens, config.bench_dim, config.bench_reps);
    std::ofstream csv(out_dir / "bench.csv");
    csv << kBenchCsvHeader << "\n";
    for (const BenchRow& row : result.rows) {
      csv << mixer_name(row.mixer) << ',' << row.tokens << ',' << row.dim << ','
          << format_double(row.median_ms) << ',' << row.mac_total << ',' << row.mac_quadratic
          << ',' << row.peak_live_elements << ',' << row.max_single_tensor << "\n";
    }
    json summary = {{"attention_slope", result.attention_slope},
                    {"cotar_slope", result.cotar_slope},
                    {"dim", config.bench_dim},
                    {"reps", config.bench_reps}};
    std::ofstream sfile(out_dir / "bench_summary.json");
    sfile << summary.dump(2) << "\n";
    std::cout << "wall-time log-log slopes: attention " << result.attention_slope << ", cotar "
              << result.cotar_slope << "\n";
  });
}

int cmd_analyze(const RunConfig& config, const std::filesystem::path& out_dir) {
  return guarded(config, out_dir, [&] {
    Dataset data = config.data_path.empty() ? generate(config.generator_spec())
                                            : load_dataset(config.data_path);
    if (data.samples.empty()) throw std::invalid_argument("analyze: dataset is empty");

    double sci_sum = 0.0, dic_sum = 0.0;
    std::vector<double> strength_sum(static_cast<std::size_t>(data.channels), 0.0);
    for (const LabeledSample& s : data.samples) {
      SeriesMatrix series = SeriesMatrix::from_sample(s.x);
      sci_sum += sci(series);
      DicResult d = dic(series);
      dic_sum += d.value;
      for (std::size_t i = 0; i < strength_sum.size(); ++i) {
        strength_sum[i] += d.model.out_strengths[i];
      }
    }
    const double n = static_cast<double>(data.samples.size());
    json doc;
    doc["sci"] = sci_sum / n;
    doc["dic"] = dic_sum / n;
    for (double& s : strength_sum) s /= n;
    doc["out_strengths"] = strength_sum;
    doc["samples"] = data.samples.size();
    std::ofstream out(out_dir / "centrality.json");
    out << doc.dump(2) << "\n";
    std::cout << "sci " << doc["sci"] << ", dic " << doc["dic"] << "\n";

    if (config.analyze_sweep) {
      const TrainConfig base_cfg = config.train_config();
      auto train_fn = [&](const Dataset& perturbed, MixerKind kind) {
        DatasetSplits splits = split_by_subject(perturbed, config.split_spec());
        TeChConfig model_cfg = config.model_config();
        model_cfg.timesteps = perturbed.timesteps;
        model_cfg.channels = perturbed.channels;
        model_cfg.classes = perturbed.classes;
        model_cfg.mixer = kind;
        double f1_sum = 0.0;
        for (std::uint64_t seed : base_cfg.seeds) {
          TeChModel model = TeChModel::init(model_cfg, seed);
          train(model, splits, base_cfg, seed);
          f1_sum += evaluate(model, splits.test).f1_macro;
        }
        return f1_sum / static_cast<double>(base_cfg.seeds.size());
      };
      const std::vector<MixerKind> mixers = {MixerKind::kAttention, MixerKind::kCoTAR};
      auto points = noise_sweep(train_fn, data, config.sweep_betas, mixers);
      std::ofstream csv(out_dir / "sweep.csv");
      csv << kSweepCsvHeader << "\n";
      for (const NoiseSweepPoint& p : points) {
        csv << format_double(p.beta) << ',' << mixer_name(p.mixer) << ',' << format_double(p.f1)
            << "\n";
      }
      std::cout << "wrote sweep.csv (" << points.size() << " points)\n";
    }
  });
}

int cmd_gradcheck(const RunConfig& config, const std::filesystem::path& out_dir) {
  int failures = 0;
  const int rc = guarded(config, out_dir, [&] {
    std::mt19937_64 rng(config.gen_seed);
    constexpr double kTol = 1e-5;

    auto report_line = [&](const char* name, const GradCheckReport& r) {
      std::cout << (r.passed ? "PASS " : "FAIL ") << name << " max_rel_err " << r.max_rel_err
                << " tol " << kTol << "\n";
      failures += r.passed ? 0 : 1;
    };
    auto sum_squares = [](Graph& g, Tensor t) {
      Tensor sq = mul(g, t, t);
      while (sq.rank() > 0) sq = reduce_sum(g, sq, 0);
      return sq;
    };

    {
      auto layer = CoTARLayer::init(8, 2, rng);
      Tensor x = Tensor::uniform({4, 8}, -1.0, 1.0, rng, true);
      auto inputs = layer.parameters();
      inputs.push_back(x);
      auto r = grad_check(
          [&](Graph& g) { return sum_squares(g, cotar_forward(g, layer, x)); }, inputs, 1e-5, kTol);
      report_line("cotar_layer", r);
    }
    {
      auto layer = AttentionLayer::init(8, rng);
      Tensor x = Tensor::uniform({4, 8}, -1.0, 1.0, rng, true);
      auto inputs = layer.parameters();
      inputs.push_back(x);
      auto r = grad_check(
          [&](Graph& g) { return sum_squares(g, attention_forward(g, layer, x)); }, inputs, 1e-5,
          kTol);
      report_line("attention_layer", r);
    }
    {
      EncoderBlock block = EncoderBlock::init(Mixer::make_cotar(8, 2, rng), 8, 16, 0.0, false, rng);
      Tensor x = Tensor::uniform({3, 8}, -1.0, 1.0, rng, true);
      auto inputs = block.parameters();
      inputs.push_back(x);
      auto r = grad_check(
          [&](Graph& g) { return sum_squares(g, block_forward(g, block, x, false)); }, inputs,
          1e-5, kTol);
      report_line("encoder_block", r);
    }
    {
      auto tk = TemporalTokenizer::init(8, 3, 3, 8, rng);
      auto ck = ChannelTokenizer::init(8, 3, 8, rng);
      Tensor x = Tensor::uniform({8, 3}, -1.0, 1.0, rng, true);
      std::vector<Tensor> inputs = tk.parameters();
      for (Tensor& t : ck.parameters()) inputs.push_back(t);
      inputs.push_back(x);
      auto r = grad_check(
          [&](Graph& g) {
            Tensor e = sum_squares(g, temporal_embed(g, tk, x));
            Tensor h = sum_squares(g, channel_embed(g, ck, x));
            return add(g, e, h);
          },
          inputs, 1e-5, kTol);
      report_line("tokenizers", r);
    }
    {
      TeChConfig cfg;
      cfg.timesteps = 8;
      cfg.channels = 3;
      cfg.classes = 2;
      cfg.model_dim = 8;
      cfg.core_dim = 2;
      cfg.patch_len = 4;
      cfg.temporal_depth = 1;
      cfg.channel_depth = 1;
      cfg.dropout = 0.0;
      TeChModel model = TeChModel::init(cfg, config.gen_seed);
      Tensor x = Tensor::uniform({8, 3}, -1.0, 1.0, rng);
      std::vector<int> label = {1};
      auto inputs = model.parameters();
      auto r = grad_check(
          [&](Graph& g) {
            Tensor logits = model.forward(g, x);
            return softmax_cross_entropy(g, reshape(g, logits, {1, 2}), label);
          },
          inputs, 1e-5, kTol);
      report_line("tech_dual_model", r);
    }
    if (failures > 0) throw std::runtime_error(std::to_string(failures) + " gradient checks failed");
  });
  return rc;
}

}  // namespace tech
