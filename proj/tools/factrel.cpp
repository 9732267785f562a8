#include <iostream>

#include "factrel/cli.hpp"

int main(int argc, char** argv) { return factrel::cli::main(argc, argv, std::cout, std::cerr); }
