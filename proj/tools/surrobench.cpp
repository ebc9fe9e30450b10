#include <iostream>

#include "surrobench/cli.hpp"

int main(int argc, char** argv) { return surrobench::run_cli(argc, argv, std::cout, std::cerr); }
