#include <iostream>

#include "clab/cli/commands.hpp"

int main(int argc, char** argv) { return clab::cli::run_cli(argc, argv, std::cout, std::cerr); }
