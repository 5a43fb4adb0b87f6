// codim-harmonic: runs experiment configs and the acceptance suite.

#include <CLI11.hpp>

#include <iostream>

#include "codim/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Degenerate elliptic operator and harmonic measure for boundaries of codimension > 1"};
  app.require_subcommand(1);

  std::string config_path;
  std::string suite = "all";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "Experiment config (YAML)")->required();
    sub->add_option("--seed", seed, "Override the config seed");
    sub->add_option("--threads", threads, "Cap on worker threads (0: all cores)");
    sub->add_option("--out-dir", out_dir, "Override the config output directory");
  };
  CLI::App* run_cmd = app.add_subcommand("run", "Run the experiment list of a config");
  add_common(run_cmd);
  CLI::App* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite at the configured resolution");
  add_common(verify_cmd);
  verify_cmd->add_option("--suite", suite, "flat, graph or all")->check(CLI::IsMember({"flat", "graph", "all"}));

  CLI11_PARSE(app, argc, argv);

  codim::ExperimentConfig config;
  try {
    config = codim::load_config(config_path);
  } catch (const codim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return codim::kExitConfigError;
  }

  codim::RunOptions options;
  options.seed = seed;
  options.output_dir = out_dir;
  options.threads = threads;
  options.table = &std::cout;
  options.log = &std::cerr;
  if (verify_cmd->parsed())
    options.verify_suite = suite == "flat" ? codim::Suite::Flat : suite == "graph" ? codim::Suite::Graph : codim::Suite::All;

  try {
    const codim::RunResult r = codim::run(config, options);
    if (r.verify)
      std::cout << (r.verify->passed() ? "verify: all criteria passed\n" : "verify: some criteria failed\n");
    std::cerr << "outputs in " << r.output_dir << '\n';
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return codim::kExitStageFailed;
  }
}
