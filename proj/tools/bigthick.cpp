#include <iostream>
#include <string>
#include <vector>

#include "bigthick/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return bigthick::run_cli(args, std::cout, std::cerr);
}
