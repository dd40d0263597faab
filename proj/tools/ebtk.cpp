// ebtk.cpp — batch CLI (subcommands wired up as modules land)
#include <iostream>

int main() {
    std::cout << "ebtk: no subcommands available yet\n";
    return 0;
}
