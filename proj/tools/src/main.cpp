#include <iostream>

#include "qlag/cli.hpp"

int main(int argc, char** argv) { return qlag::cli::run(argc, argv, std::cout, std::cerr); }
