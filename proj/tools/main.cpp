#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) {
    return so3sync::cli::run(argc, argv, std::cout, std::cerr);
}
