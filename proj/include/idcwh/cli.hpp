#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace idcwh::cli {

// Dispatches the train / encode / eval / sweep subcommands. args excludes
// the program name. Exit codes: 0 success, 2 configuration error, 3 data
// error, 4 divergence, 1 anything else.
int run(const std::vector<std::string>& args, std::ostream& out = std::cout,
        std::ostream& err = std::cerr);

}  // namespace idcwh::cli
