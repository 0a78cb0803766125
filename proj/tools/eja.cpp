#include <iostream>

#include "eja/cli.hpp"

int main(int argc, char** argv) { return eja::cli::run(argc, argv, std::cout, std::cerr); }
