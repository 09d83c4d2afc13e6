#include <iostream>

#include "lipext/cli.hpp"

int main(int argc, char** argv) { return lipext::run_command(argc, argv, std::cout, std::cerr); }
