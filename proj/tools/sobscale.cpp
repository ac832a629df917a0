#include <iostream>

#include "sobscale/cli.hpp"

int main(int argc, char** argv) { return sobscale::cli::run(argc, argv, std::cerr); }
