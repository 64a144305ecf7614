#include <iostream>

#include "specleak/cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return specleak::cli::run(args, std::cout, std::cerr);
}
