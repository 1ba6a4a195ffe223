#include <iostream>

#include "stc_cli.hpp"

int main(int argc, char** argv) { return stc::cli::run(argc, argv, std::cout, std::cerr); }
