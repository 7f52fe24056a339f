#include <cstdio>
#include <string>
#include <vector>

#include "bpdo/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  const bpdo::cli::RunResult r = bpdo::cli::run(args);
  if (!r.diagnostic.empty())
    std::fprintf(r.exit_code == 2 ? stderr : stdout, "%s\n", r.diagnostic.c_str());
  return r.exit_code;
}
