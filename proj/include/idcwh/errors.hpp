#pragma once

#include <stdexcept>

namespace idcwh {

// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid configuration value or unknown configuration key.
struct ConfigError : Error {
    using Error::Error;
};

// Dataset and file problems: missing files, malformed headers, truncation,
// dimension mismatches, degenerate inputs.
struct DataError : Error {
    using Error::Error;
};

// Training produced a non-finite or absurdly large loss or parameter.
struct DivergenceError : Error {
    using Error::Error;
};

}  // namespace idcwh
