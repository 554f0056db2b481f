#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lforge/pipeline/commands.hpp"

int main(int argc, char** argv) {
  using namespace lforge::pipeline;
  CLI::App app{"lforge: expression-to-ligand pipeline"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1, 1);

  std::string config_path;
  std::int64_t seed = -1;
  std::vector<std::string> overrides;
  bool no_cache = false;
  for (const auto& [name, _] : stages()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " stage");
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "override the config seed")->check(CLI::NonNegativeNumber);
    sub->add_option("--override", overrides, "key=value, repeatable");
    sub->add_flag("--no-cache", no_cache, "ignore cached stage outputs");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitInput;
  }
  const std::string stage = app.get_subcommands().front()->get_name();

  PipelineConfig cfg;
  try {
    cfg = PipelineConfig::load(config_path);
    for (const auto& kv : overrides) cfg.apply_override(kv);
    if (seed >= 0) cfg.set("seed", seed);
  } catch (const std::exception& e) {
    std::cerr << "lforge " << stage << ": error: " << e.what() << "\n";
    return exit_code_for(std::current_exception());
  }
  return run_stage(stage, cfg, {.use_cache = !no_cache});
}
