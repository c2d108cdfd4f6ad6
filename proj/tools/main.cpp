#include "rara/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    rara::cli::init_logging();
    return rara::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
