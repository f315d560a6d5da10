#include <iostream>

#include "hivqe/cli.hpp"

int main(int argc, char** argv) { return hivqe::run_cli(argc, argv, std::cout, std::cerr); }
