#include <iostream>

#include "qocc_cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv, argv + argc);
    return qocc::cli::run_cli(args, std::cout, std::cerr);
}
