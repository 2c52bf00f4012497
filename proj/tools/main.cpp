#include <iostream>

#include "terra/cli.hpp"

int main(int argc, char** argv) { return terra::run_cli(argc, argv, std::cout, std::cerr); }
