#include <iostream>

#include "uwoc/cli.hpp"

int main(int argc, char** argv) { return uwoc::cli::run(argc, argv, std::cout, std::cerr); }
