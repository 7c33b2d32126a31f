#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "peq/config.hpp"
#include "peq/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Primitive-equation solver and attractor diagnostics"};
  app.require_subcommand(1, 1);
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  for (const char* name : {"simulate", "ensemble", "probe", "dimension", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "flat key = value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides run.out)");
    sub->add_option("--seed", seed, "random seed (overrides numerics.seed)");
  }
  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  const CLI::App* sub = app.get_subcommands().front();
  try {
    peq::RunConfig cfg = peq::load_config(config_path);
    if (sub->count("--out")) cfg.out_dir = out_dir;
    if (sub->count("--seed")) cfg.seed = seed;
    return peq::run_subcommand(*peq::parse_subcommand(name), cfg, std::cout, std::cerr);
  } catch (const peq::ConfigError& e) {
    std::cout << nlohmann::json{{"command", name}, {"status", "error"}, {"failures", {e.what()}}, {"line", e.line()}}.dump()
              << '\n';
  } catch (const std::exception& e) {
    std::cout << nlohmann::json{{"command", name}, {"status", "error"}, {"failures", {e.what()}}}.dump() << '\n';
  }
  return peq::kExitError;
}
