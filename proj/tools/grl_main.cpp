#include <iostream>
#include <string>
#include <vector>

#include "grl/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return grl::run_cli(args, std::cout, std::cerr);
}
