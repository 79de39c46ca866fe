#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  return oligo_rd::cli::run(argc, argv, std::cout, std::cerr);
}
