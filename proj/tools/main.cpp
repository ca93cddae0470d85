#include <iostream>

#include "sdecmp/cli/cli.hpp"

int main(int argc, char** argv) { return sdecmp::run_cli(argc, argv, std::cout, std::cerr); }
