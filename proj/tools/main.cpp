#include "ssiter/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return ssiter::cli::run_cli(argc, argv, std::cout, std::cerr); }
