#include <iostream>

#include "raysamp/cli.hpp"

int main(int argc, char** argv) { return raysamp::run_cli(argc, argv, std::cout, std::cerr); }
