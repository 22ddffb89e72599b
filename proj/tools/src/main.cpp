#include <iostream>

#include "delayflux_cli/commands.hpp"

int main(int argc, char** argv) { return delayflux::cli::run(argc, argv, std::cout, std::cerr); }
