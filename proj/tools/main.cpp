#include <iostream>

#include "fbench/cli.hpp"

int main(int argc, char** argv) { return fbench::dispatch(argc, argv, std::cout, std::cerr); }
