#include <iostream>

#include "corp_cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return corp::cli::run(args, std::cout, std::cerr);
}
