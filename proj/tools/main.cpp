#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return frfvib::cli::run(argc, argv, std::cerr); }
