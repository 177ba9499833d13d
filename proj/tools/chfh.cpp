#include <iostream>

#include "chfh/cli.hpp"

int main(int argc, char** argv)
{
    return chfh::cli_main(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
