#include <iostream>

#include "homoclinic/cli.hpp"

int main(int argc, char** argv)
{
    return homoclinic::cli::run(argc, argv, std::cout, std::cerr);
}
