#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return shapecomplete::cli::run(argc, argv, std::cout, std::cerr);
}
