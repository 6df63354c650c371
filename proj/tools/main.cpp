#include <iostream>
#include <string>
#include <vector>

#include "vx/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return vx::run_cli(args, std::cout, std::cerr);
}
