#include <iostream>
#include <string>
#include <vector>

#include "lmol/cli/commands.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv, argv + argc);
  return lmol::cli::run(args, std::cout, std::cerr);
}
