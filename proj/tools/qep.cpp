#include <iostream>

#include "qep/cli.hpp"

int main(int argc, char **argv)
{
    return qep::cli::main(argc, argv, std::cout, std::cerr);
}
