#include "levisim/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return levisim::cli::run_main(argc, argv, std::cout, std::cerr);
}
