#include <iostream>

#include "pdc/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pdc::run_cli(args, std::cout, std::cerr);
}
