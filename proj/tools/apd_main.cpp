#include <iostream>
#include <string>
#include <vector>

#include "apd/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return apd::run_cli(args, std::cout, std::cerr);
}
