#include <iostream>

#include "dsff/cli.hpp"

int main(int argc, char** argv) { return dsff::cli::run(argc, argv, std::cout, std::cerr); }
