#include <iostream>
#include <string>
#include <vector>

#include "smg_cli/commands.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return smg::cli::run_main(args, std::cout, std::cerr);
}
