#include <iostream>

#include "l0relax_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return l0relax::cli::run(args, std::cout, std::cerr);
}
