#include <iostream>

#include "eigentow/cli.hpp"

int main(int argc, char** argv) { return eigentow::cli_main(argc, argv, std::cout, std::cerr); }
