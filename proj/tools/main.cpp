#include <string>
#include <vector>

#include "sklab/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sklab::cli::run(args);
}
