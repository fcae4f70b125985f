#include <iostream>
#include <string>
#include <vector>

#include "bincomp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bincomp::cli::run(args, std::cout, std::cerr);
}
