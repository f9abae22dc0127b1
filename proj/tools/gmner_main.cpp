#include <iostream>
#include <string>
#include <vector>

#include "gmner/cli.hpp"

int main(int argc, char** argv)
{
	std::vector<std::string> args(argv, argv + argc);
	return gmner::cli::run(args, std::cout, std::cerr);
}
