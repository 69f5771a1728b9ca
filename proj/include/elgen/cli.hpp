#pragma once
// Batch CLI surface: argument parsing, dispatch into the library, and
// deterministic JSON reports whose `verified` verdicts come from the
// independent validators.

#include <string>
#include <vector>

namespace elgen {

struct CliResult {
  int exit_code = 0;  // 0 ok, 2 parse, 3 verification/precondition, 4 budget
  std::string out;    // JSON report (sorted keys, trailing newline)
};

// testable core; the binary forwards argv and prints `out`
CliResult run_cli(const std::vector<std::string>& args);

}  // namespace elgen
