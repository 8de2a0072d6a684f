#pragma once

#include <string>

#include "cli/config.hpp"

namespace pspin::cli {

struct CommonOptions {
  std::string out_dir = ".";
  bool has_seed_override = false;
  std::uint64_t seed_override = 0;
  int threads = 0;  // 0: config value, then PSPIN_THREADS, then 1
};

int cmd_critical(const LoadedConfig& cfg, const CommonOptions& opt);
int cmd_solve_fdt(const LoadedConfig& cfg, const CommonOptions& opt);
int cmd_solve_twotime(const LoadedConfig& cfg, const CommonOptions& opt);
int cmd_psi_iterate(const LoadedConfig& cfg, const CommonOptions& opt);
int cmd_simulate(const LoadedConfig& cfg, const CommonOptions& opt);
int cmd_compare(const LoadedConfig& cfg, const CommonOptions& opt);
int cmd_verify(const std::string& level, const CommonOptions& opt);

}  // namespace pspin::cli
