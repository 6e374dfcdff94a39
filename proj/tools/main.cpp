#include "domscreen/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return domscreen::run_cli(argc, argv, std::cout, std::cerr);
}
