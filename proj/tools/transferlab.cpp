#include <iostream>

#include "transferlab/cli.hpp"

int main(int argc, char** argv) { return transferlab::run_cli(argc, argv, std::cout, std::cerr); }
