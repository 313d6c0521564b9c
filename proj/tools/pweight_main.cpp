#include <string>
#include <vector>

#include "pweight/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return pweight::cli::run(std::move(args));
}
