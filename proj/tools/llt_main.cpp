#include "llt/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return llt::run_subcommand(argc, argv, std::cout, std::cerr); }
