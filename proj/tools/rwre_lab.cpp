#include <iostream>

#include "rwre/cli.hpp"

int main(int argc, char** argv) {
  return rwre::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
