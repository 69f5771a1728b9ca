#include "elgen/cli.hpp"

#include <cstdio>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  elgen::CliResult r = elgen::run_cli(args);
  std::fputs(r.out.c_str(), stdout);
  return r.exit_code;
}
