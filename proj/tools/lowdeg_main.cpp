#include <iostream>

#include "lowdeg/cli.h"

int main(int argc, char** argv) { return lowdeg::cli::run(argc, argv, std::cout, std::cerr); }
