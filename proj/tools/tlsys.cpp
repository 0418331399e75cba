#include <iostream>

#include "tlsys/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tlsys::run_cli(args, std::cout, std::cerr);
}
