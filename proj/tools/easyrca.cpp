#include <easyrca/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return easyrca::cli::run(argc, argv, std::cout, std::cerr); }
