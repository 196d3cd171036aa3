#include <string>
#include <vector>

#include "wrinkle/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wrinkle::run_cli(std::move(args));
}
