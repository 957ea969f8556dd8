#include <iostream>

#include "mqmc/cli.hpp"

int main(int argc, char** argv) { return mqmc::run_cli(argc, argv, std::cout, std::cerr); }
