#pragma once

#include <optional>
#include <string>

#include "lphom/config.hpp"

namespace lphom {

struct CliOptions {
  std::string out_dir = ".";
  int threads = 0;           // 0: hardware concurrency
  std::optional<std::uint64_t> seed;  // overrides config seed
  bool dry_run = false;
  bool emit_plot_data = false;
};

/// Subcommand bodies; each validates, writes its declared outputs under
/// out_dir and returns the process exit code (0 iff every acceptance flag
/// in the produced reports passes).
int cmd_covering(const Config& config, const CliOptions& options);
int cmd_microstructure(const Config& config, const CliOptions& options);
int cmd_lts_verify(const Config& config, const CliOptions& options);
int cmd_homogenize(const Config& config, const CliOptions& options);
int cmd_macro(const Config& config, const CliOptions& options);
int cmd_converge(const Config& config, const CliOptions& options);

}  // namespace lphom
