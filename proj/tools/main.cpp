#include <iostream>

#include "coldstart/cli.hpp"

int main(int argc, char** argv) { return coldstart::cli::run_command(argc, argv, std::cout, std::cerr); }
