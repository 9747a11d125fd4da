#include <string>
#include <vector>

#include "gsde/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return gsde::cli::run(args);
}
