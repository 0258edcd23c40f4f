#include <iostream>
#include <string>
#include <vector>

#include "arsjoint/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return arsjoint::run(args, std::cout, std::cerr);
}
