#include <iostream>

#include "sstlab/cli.hpp"

int main(int argc, char** argv) { return sstlab::cli::run(argc, argv, std::cout, std::cerr); }
