#include <iostream>

#include "setcover/app/cli.hpp"

int main(int argc, char** argv) {
  return setcover::app::run_cli(argc, argv, std::cout, std::cerr);
}
