#include <iostream>

#include "curveshape/commands.hpp"

int main(int argc, char** argv) {
  return curveshape::run_cli(argc, argv, std::cout, std::cerr);
}
