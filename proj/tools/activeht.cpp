#include <iostream>

#include "activeht/cli.hpp"

int main(int argc, char** argv) { return activeht::cli::dispatch(argc, argv, std::cout, std::cerr); }
