#include <iostream>

#include "sadd/cli.hpp"

int main(int argc, char** argv) { return sadd::run_cli(argc, argv, std::cout, std::cerr); }
