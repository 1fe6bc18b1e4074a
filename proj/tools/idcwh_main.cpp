#include <vector>

#include "idcwh/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return idcwh::cli::run(args);
}
