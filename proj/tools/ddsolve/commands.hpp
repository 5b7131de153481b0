#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

#include <ddsplit/problems.hpp>

#include "config.hpp"

namespace ddsolve {

struct CommandOptions {
  int threads = 1;
  std::optional<std::string> out_dir;
  std::optional<int> max_iters;
  std::optional<double> tol;
};

enum ExitCode { exit_ok = 0, exit_error = 1, exit_max_iters = 2 };

/// Applies command-line overrides to the parsed configuration.
RunConfig apply_overrides(RunConfig config, const CommandOptions& options);

struct SolveOutcome {
  ddsplit::Problem problem;
  ddsplit::RunResult result;
  std::string trace_csv;
  double seconds = 0.0;
};

SolveOutcome solve(const RunConfig& config);

/// Writes trace.csv, solution.csv, one duals file per interface and
/// summary.json into dir.
void write_outputs(const std::filesystem::path& dir, const RunConfig& config,
                   const SolveOutcome& outcome);

int run_command(const std::filesystem::path& config, const CommandOptions& options,
                std::ostream& out);
int verify_command(const std::filesystem::path& config, const CommandOptions& options,
                   std::ostream& out);
int describe_command(const std::filesystem::path& config, std::ostream& out);

/// Dispatches argv; returns the process exit code.
int main_entry(int argc, char** argv);

}  // namespace ddsolve
