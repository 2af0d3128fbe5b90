#include <iostream>
#include <string>
#include <vector>

#include "markov_rank/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return markov_rank::cli::run(args, std::cout, std::cerr);
}
