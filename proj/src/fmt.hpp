#pragma once

// Shortest round-trip double formatting, shared by the config serializer,
// training log, and report writers so emitted files are byte-stable.

#include <charconv>
#include <string>

namespace idcwh::fmt {

inline std::string shortest(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace idcwh::fmt
