#include <iostream>
#include <string>
#include <vector>

#include "tnp/cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tnp::cli::run_cli(args, std::cout, std::cerr);
}
