#include <iostream>

#include "musener/cli.hpp"

int main(int argc, char** argv) { return musener::cli::run(argc, argv, std::cout, std::cerr); }
