#include <iostream>

#include "fesilc/cli.hpp"

int main(int argc, char** argv) { return fesilc::run_cli(argc, argv, std::cout, std::cerr); }
