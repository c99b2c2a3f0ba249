#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace randattract::cli {

enum ExitCode : int { kSuccess = 0, kValidation = 1, kNumerical = 2, kInvariant = 3 };

struct RunOptions {
  std::string subcommand;
  std::string config_path;  // empty: defaults
  std::string out_dir;      // empty: RANDATTRACT_OUT, then ./randattract_out
  int threads = 0;          // 0: available cores
  std::optional<std::uint64_t> seed;
  std::optional<int> levels;
};

/// Runs one subcommand and returns its exit code. Outputs of a failed run are
/// removed; run.log is kept.
int run(const RunOptions& options, std::ostream& err);

}  // namespace randattract::cli
