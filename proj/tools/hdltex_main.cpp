#include <vector>

#include "hdltex/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hdltex::run_command(args);
}
