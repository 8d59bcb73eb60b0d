#include <iostream>
#include <string>
#include <vector>

#include "srplan/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return srplan::cli::run(args, std::cout, std::cerr);
}
