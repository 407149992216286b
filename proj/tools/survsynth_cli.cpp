#include <iostream>

#include "survsynth/pipeline.hpp"

int main(int argc, char** argv) { return survsynth::run_cli(argc, argv, std::cout, std::cerr); }
