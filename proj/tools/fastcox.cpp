#include <iostream>
#include <string>
#include <vector>

#include "fastcox/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return fastcox::cli::run(args, std::cout, std::cerr);
}
