#include <iostream>
#include <string>
#include <vector>

#include "equicalib/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return equicalib::cli::run(args, std::cout, std::cerr);
}
