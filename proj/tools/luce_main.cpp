#include <iostream>
#include <string>
#include <vector>

#include "luce/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return luce::cli::dispatch(args, std::cout, std::cerr);
}
