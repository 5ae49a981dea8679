#include <iostream>

#include "coneflow/cli/commands.hpp"

int main(int argc, char** argv) {
  return coneflow::cli::run_cli(argc, argv, std::cout, std::cerr);
}
