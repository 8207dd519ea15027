#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "gapfilter/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mean-square optimal filtering of stationary processes observed with noise "
               "and missing stretches"};

  std::string scenario, out, command = "filter";
  std::uint64_t seed = 0;
  int paths = 0;
  bool dump_paths = false;

  app.add_option("--scenario", scenario, "scenario file to run")->required();
  app.add_option("--out", out, "directory for h.csv, c.csv, v.csv, summary.txt, ...")->required();
  app.add_option("--command", command,
                 "one of: filter, truncated, minimax, montecarlo, oracle-check");
  auto* seed_opt = app.add_option("--seed", seed, "override the scenario seed");
  auto* paths_opt = app.add_option("--paths", paths, "override the scenario path count");
  app.add_flag("--dump-paths", dump_paths, "write per-path residuals (montecarlo)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  gapfilter::RunOverrides ov;
  if (seed_opt->count() > 0) ov.seed = seed;
  if (paths_opt->count() > 0) ov.paths = paths;
  ov.dump_paths = dump_paths;

  const int code = gapfilter::run_command(command, scenario, out, ov);
  if (code == 0) {
    std::cout << "ok: results in " << out << "/summary.txt\n";
  } else {
    std::cerr << "failed (exit " << code << "); see " << out << "/summary.txt\n";
  }
  return code;
}
