#include <iostream>

#include "ssslab/cli.hpp"

int main(int argc, char** argv)
{
    return ssslab::cli::run(argc, argv, std::cout, std::cerr);
}
