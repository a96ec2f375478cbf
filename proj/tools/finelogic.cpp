#include <iostream>

#include "finelogic/cli/app.hpp"

int main(int argc, char** argv) { return finelogic::cli::run(argc, argv, std::cout, std::cerr); }
