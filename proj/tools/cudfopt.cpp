#include <iostream>

#include <CLI11.hpp>

#include "cudfopt/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"cudfopt"};
  cudfopt::CliConfig cfg;
  try {
    cfg = cudfopt::parse_args(app, argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return cudfopt::run(cfg, std::cin, std::cout, std::cerr);
}
