#include <iostream>

#include "perseval/cli.hpp"

int main(int argc, char** argv) {
  return perseval::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
