#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "bvpop/cli/config.hpp"
#include "bvpop/cli/scenario.hpp"
#include "bvpop/cli/schema.hpp"

namespace {

struct RunArgs {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
};

void add_run_options(CLI::App& cmd, RunArgs& args) {
  cmd.add_option("config", args.config, "scenario config (JSON)")->required();
  cmd.add_option("--out", args.out, "output directory (overrides output_path)");
  cmd.add_option("--seed", args.seed, "random seed (overrides seed)");
}

int execute(const RunArgs& args, std::optional<bvpop::cli::ScenarioKind> expected) {
  using namespace bvpop::cli;
  try {
    ScenarioConfig cfg = load_config(args.config);
    if (expected && cfg.kind != *expected)
      throw ConfigError("kind", "config declares kind \"" + std::string(to_string(cfg.kind)) +
                                      "\" but the subcommand is \"" + std::string(to_string(*expected)) + "\"");
    if (args.out) cfg.output_path = *args.out;
    if (args.seed) cfg.seed = *args.seed;
    const RunResult r = run_scenario(cfg);
    std::cout << r.headline << "\n" << "wrote " << r.csv_path.string() << " and " << r.summary_path.string() << "\n";
    return r.exit_code;
  } catch (const std::exception& e) {
    std::cerr << error_record(e) << std::endl;
    return exit_code_for(e);
  }
}

}  // namespace

int main(int argc, char** argv) {
  using namespace bvpop::cli;
  CLI::App app{"Stieltjes functionals, monotonicity checks and structured population equilibria"};
  app.require_subcommand(0, 1);
  bool print_schema = false;
  app.add_flag("--print-schema", print_schema, "print the config schema and exit");

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "run the scenario described by a config file");
  add_run_options(*run, run_args);

  CLI::App* schema = app.add_subcommand("print-schema", "print the config schema");

  std::vector<std::pair<CLI::App*, ScenarioKind>> kind_cmds;
  std::vector<RunArgs> kind_args(all_kinds().size());
  for (std::size_t i = 0; i < all_kinds().size(); ++i) {
    const ScenarioKind k = all_kinds()[i];
    CLI::App* cmd = app.add_subcommand(std::string(to_string(k)),
                                       "run a config of kind " + std::string(to_string(k)));
    add_run_options(*cmd, kind_args[i]);
    kind_cmds.emplace_back(cmd, k);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  if (print_schema || schema->parsed()) {
    std::cout << config_schema();
    return kExitOk;
  }
  if (run->parsed()) return execute(run_args, std::nullopt);
  for (std::size_t i = 0; i < kind_cmds.size(); ++i)
    if (kind_cmds[i].first->parsed()) return execute(kind_args[i], kind_cmds[i].second);

  std::cerr << app.help();
  return kExitError;
}
