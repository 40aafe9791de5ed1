#include <string>
#include <vector>

#include "lobpcg/cli.hpp"

int main(int argc, char** argv) {
  return lobpcg::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
