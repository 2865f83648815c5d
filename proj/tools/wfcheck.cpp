#include <iostream>

#include "witness/cli.hpp"

int main(int argc, char** argv) {
  return witness::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
