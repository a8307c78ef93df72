#include <iostream>

#include "logitgraph/cli_io.hpp"

int main(int argc, char** argv) {
  return logitgraph::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
