#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "lphom/cli.hpp"
#include "lphom/log.hpp"

int main(int argc, char** argv) {
  CLI::App app{"lphom: locally-periodic homogenization toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  lphom::CliOptions options;
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  app.add_option("--config", config_path, "path to the JSON run configuration")->required();
  app.add_option("--out", options.out_dir, "output directory (default: current)");
  app.add_option("--threads", options.threads, "worker thread cap (0 = hardware)");
  app.add_option("--seed", seed_override, "override the config seed")
      ->each([&](const std::string&) { seed_given = true; });
  app.add_flag("--dry-run", options.dry_run, "validate config and print the plan only");
  app.add_flag("--emit-plot-data", options.emit_plot_data, "write per-study plotting CSVs");

  auto* covering = app.add_subcommand("covering", "build and serialize a cube covering");
  auto* micro = app.add_subcommand("microstructure", "export microstructure voxels");
  auto* lts = app.add_subcommand("lts-verify", "run the operator convergence suite");
  auto* homog = app.add_subcommand("homogenize", "cell solves and homogenized tensor sampling");
  auto* macro = app.add_subcommand("macro", "macroscopic solve from a tensor file");
  auto* converge = app.add_subcommand("converge", "direct-vs-homogenized / lp-np studies");
  for (auto* sub : {covering, micro, lts, homog, macro, converge}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);
  if (seed_given) options.seed = seed_override;

  try {
    lphom::Config config = lphom::Config::from_file(config_path);
    if (covering->parsed()) return lphom::cmd_covering(config, options);
    if (micro->parsed()) return lphom::cmd_microstructure(config, options);
    if (lts->parsed()) return lphom::cmd_lts_verify(config, options);
    if (homog->parsed()) return lphom::cmd_homogenize(config, options);
    if (macro->parsed()) return lphom::cmd_macro(config, options);
    if (converge->parsed()) return lphom::cmd_converge(config, options);
  } catch (const lphom::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
