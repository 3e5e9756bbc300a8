// jumpsigma.cpp: Command-line entry point

#include <iostream>

#include "jumpsigma/cli.hpp"

int main(int argc, char** argv) { return jumpsigma::cli::main(argc, argv, std::cout, std::cerr); }
