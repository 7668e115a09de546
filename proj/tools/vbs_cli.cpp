#include <iostream>

#include "vbs/cli.hpp"

int main(int argc, char** argv) {
  return vbs::run_cli(argc, argv, std::cout, std::cerr);
}
