#include "heatgate/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return heatgate::cli::run_cli(argc, argv, std::cout, std::cerr);
}
