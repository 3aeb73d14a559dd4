#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace frfvib::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfigError = 2,
  kDivergence = 3,
  kMaxIterations = 4,
  kSweepFailure = 5,
  kNotConvergent = 6,
};

struct Options {
  std::string config;
  std::string out;  // empty: use the config's output directory
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
  std::optional<std::string> grid_override;
  bool no_warm_start = false;
  bool warm_start = false;
  std::string gains;  // optional gains file
  bool quiet = false;
};

int cmd_frf(const Options& opt, std::ostream& log);
int cmd_tune(const Options& opt, std::ostream& log);
int cmd_simulate(const Options& opt, std::ostream& log);
int cmd_converge_check(const Options& opt, std::ostream& log);

/// Parses argv and dispatches to a subcommand; returns the process exit code.
int run(int argc, char** argv, std::ostream& log);

}  // namespace frfvib::cli
