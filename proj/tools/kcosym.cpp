#include <iostream>

#include "kcosym/cli.hpp"

int main(int argc, char** argv) { return kcosym::cli::run(argc, argv, std::cout, std::cerr); }
