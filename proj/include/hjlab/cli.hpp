#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace hjlab {

enum class Subcommand { verify_hr, critical_value, evolve, regularity_experiment };

struct RunOptions {
  Subcommand command = Subcommand::verify_hr;
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;  // overrides output_dir of the config
  int threads = 1;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;       // config or I/O error, aborted run
inline constexpr int checks_failed = 2;  // reports written, some check failed
}  // namespace exit_code

/// Runs one subcommand and returns the process exit status. Progress and
/// errors go to `log`.
int run(const RunOptions& options, std::ostream& log);

}  // namespace hjlab
