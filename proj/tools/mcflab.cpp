#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcflab/mcflab.h"

int main(int argc, char** argv) {
  CLI::App app{"mean curvature flow lab"};
  app.require_subcommand(1);

  std::string out = "mcf_out";
  bool quiet = false;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "override scenario seed");
  app.add_option("--out", out, "output directory (run, sweep, check)");
  app.add_flag("--quiet", quiet, "suppress progress output");
  app.add_flag_callback("--version", [] {
    std::cout << mcf_version() << '\n';
    throw CLI::Success();
  });

  std::string config;
  auto* run = app.add_subcommand("run", "run one flow and write series, snapshots and manifest");
  run->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);

  std::string key;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "run one flow per value of a config key");
  sweep->add_option("config", config, "config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--key", key, "amplitude | neck_radius | resolution | cfl")->required();
  sweep->add_option("--values", values, "comma separated values")->delimiter(',');

  auto* check = app.add_subcommand("check", "inequality suite over the fixed surface battery");
  check->add_option("config", config, "config file (defaults when omitted)")->check(CLI::ExistingFile);

  std::string run_dir, format;
  auto* exp = app.add_subcommand("export", "convert a run's snapshots");
  exp->add_option("run_dir", run_dir, "directory holding manifest.json")->required();
  exp->add_option("--format", format, "obj | profile-csv")->required()->check(CLI::IsMember({"obj", "profile-csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // usage errors share the software-failure exit code
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  const int seed_set = seed_opt->count() > 0 ? 1 : 0;
  if (*run) return mcf_cmd_run(config.c_str(), out.c_str(), quiet, seed_set, seed);
  if (*sweep)
    return mcf_cmd_sweep(config.c_str(), key.c_str(), values.data(), values.size(), out.c_str(), quiet, seed_set, seed);
  if (*check) return mcf_cmd_check(config.empty() ? nullptr : config.c_str(), out.c_str(), quiet);
  return mcf_cmd_export(run_dir.c_str(), format.c_str());
}
