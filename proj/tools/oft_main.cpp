#include <string>
#include <vector>

#include "oft_cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return oft::cli::run(args);
}
