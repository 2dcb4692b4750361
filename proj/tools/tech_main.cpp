#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "tech/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"tech: centralized token mixing for multichannel time-series classification"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir = "out";

  struct Sub {
    const char* name;
    const char* help;
    int (*run)(const tech::RunConfig&, const std::filesystem::path&);
  };
  const std::vector<Sub> subs = {
      {"generate", "synthesize a dataset file", tech::cmd_generate},
      {"train", "train over the configured seeds and save checkpoints", tech::cmd_train},
      {"eval", "evaluate a checkpoint on the test split", tech::cmd_eval},
      {"bench", "token-mixer scaling benchmark", tech::cmd_bench},
      {"analyze", "centralization metrics and optional noise sweep", tech::cmd_analyze},
      {"gradcheck", "finite-difference checks over every layer type", tech::cmd_gradcheck},
  };

  for (const Sub& sub : subs) {
    CLI::App* cmd = app.add_subcommand(sub.name, sub.help);
    cmd->add_option("--config", config_path, "JSON config file");
    cmd->add_option("--set", overrides, "key=value config override (repeatable)");
    cmd->add_option("--out", out_dir, "output directory");
    cmd->callback([&, run = sub.run] {
      tech::RunConfig config;
      try {
        if (!config_path.empty()) config = tech::RunConfig::from_file(config_path);
        config.apply_overrides(overrides);
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::exit(1);
      }
      std::exit(run(config, out_dir));
    });
  }

  CLI11_PARSE(app, argc, argv);
  return 0;
}
