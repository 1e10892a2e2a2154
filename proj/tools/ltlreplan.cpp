#include <iostream>

#include "ltlreplan/cli.hpp"

int main(int argc, char** argv) {
    return ltlreplan::cli::dispatch({argv + 1, argv + argc}, std::cout, std::cerr);
}
