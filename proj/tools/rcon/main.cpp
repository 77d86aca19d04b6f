#include <iostream>

#include "rcon/cli.hpp"

int main(int argc, char** argv) { return rcon::cli::run(argc, argv, std::cout, std::cerr); }
