#include <iostream>

#include "dirac_graph/commands.hpp"

int main(int argc, char** argv) { return dgraph::run_cli(argc, argv, std::cout, std::cerr); }
