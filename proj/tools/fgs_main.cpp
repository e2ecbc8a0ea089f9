#include "fgs/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return fgs::cli::run(argc, argv, std::cout, std::cerr);
}
