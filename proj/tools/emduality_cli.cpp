#include <iostream>

#include "emd/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return emd::cli::run(args, std::cout, std::cerr);
}
