#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cspmv {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitData = 3,
  kExitNumerical = 4,
};

/// Runs one command. `args` excludes the program name.
///
///   bench <matrix|dir>    per-configuration SpMV timings
///   dataset <dir>         timings, labels and the five training CSVs
///   predict <matrix>      cascade decisions with scores
///   solve <matrix>        one solve in default, seq or async mode
///   compare <matrix>      all three modes side by side
///   report <dir>          table and speedups.csv from stored comparisons
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cspmv
