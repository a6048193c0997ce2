#include <iostream>

#include "multexode/cli.hpp"

int main(int argc, char** argv) { return multexode::cli::run(argc, argv, std::cout, std::cerr); }
