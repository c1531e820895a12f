#include <iostream>

#include "dqfd_cli/commands.hpp"

int main(int argc, char** argv) {
  return dqfd::cli::run_cli(argc, argv, std::cin, std::cout, std::cerr);
}
