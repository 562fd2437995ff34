#include <iostream>

#include "disparity/cli.hpp"

int main(int argc, char** argv) { return disparity::run_cli(argc, argv, std::cout, std::cerr); }
