#include <iostream>

#include "heatlab/cli.hpp"

int main(int argc, char** argv) { return heatlab::cli::run(argc, argv, std::cout, std::cerr); }
