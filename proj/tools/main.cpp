#include <string>
#include <vector>

#include "switchsim/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return switchsim::cli::run(args);
}
