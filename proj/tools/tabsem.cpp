#include <iostream>

#include "tabsem/gateway/cli.hpp"

int main(int argc, char** argv) {
    return tabsem::gateway::cli_main(argc, argv, std::cout, std::cerr);
}
