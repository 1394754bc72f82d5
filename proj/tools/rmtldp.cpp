#include <string>
#include <vector>

#include "rmtldp/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rmtldp::cli::run(args);
}
