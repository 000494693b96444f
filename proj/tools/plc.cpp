#include <iostream>
#include <string>
#include <vector>

#include "plc_cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return plc::cli::dispatch(std::move(args), std::cout, std::cerr);
}
