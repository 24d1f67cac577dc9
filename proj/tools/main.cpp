#include <string>
#include <vector>

#include "quantbench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return quantbench::run_cli(args);
}
