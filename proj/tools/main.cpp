#include <iostream>

#include "aipi/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return aipi::run_cli(args, std::cout, std::cerr);
}
