#include <iostream>

#include "mambatrack/cli.hpp"

int main(int argc, char** argv) { return mambatrack::run_cli(argc, argv, std::cout, std::cerr); }
