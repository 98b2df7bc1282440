#include <iostream>

#include "prbm/cli.hpp"

int main(int argc, char** argv) { return prbm::cli::dispatch(argc, argv, std::cout, std::cerr); }
