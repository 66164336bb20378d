#include <iostream>

#include "locdist_cli/cli.hpp"

int main(int argc, char** argv) { return locdist::cli::cli_main(argc, argv, std::cout, std::cerr); }
