#include <iostream>
#include <string>
#include <vector>

#include "chorate/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return chorate::cli::run(args, std::cout, std::cerr);
}
