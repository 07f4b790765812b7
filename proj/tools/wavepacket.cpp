#include <iostream>
#include <string>
#include <vector>

#include "wavepacket/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wavepacket::cli::run(args, std::cout, std::cerr);
}
