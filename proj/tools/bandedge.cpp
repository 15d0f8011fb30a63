#include "bandedge/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return bandedge::cli::run(argc, argv, std::cout, std::cerr);
}
