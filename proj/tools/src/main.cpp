#include <iostream>

#include "hsgns_cli/cli.hpp"

int main(int argc, char** argv) { return hsgns::cli::run(argc, argv, std::cout, std::cerr); }
