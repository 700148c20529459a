// tools/rfa_main.cc

#include <iostream>

#include "cli.h"

int main(int argc, char** argv) { return rfa::cli::run(argc, argv, std::cout, std::cerr); }
