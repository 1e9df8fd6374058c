#include <iostream>

#include "hlpe/cli.hpp"

int main(int argc, char** argv) { return hlpe::run_cli(argc, argv, std::cout, std::cerr); }
