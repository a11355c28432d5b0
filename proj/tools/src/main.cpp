// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    auto args = std::vector<std::string>(argv + 1, argv + argc);
    return orchestra::cli::run(args, std::cin, std::cout, std::cerr);
}
