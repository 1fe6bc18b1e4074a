#pragma once

// Little-endian binary readers/writers used by the dataset, checkpoint and
// codes file formats. Values are composed byte by byte so the on-disk layout
// does not depend on host endianness.

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "idcwh/errors.hpp"

namespace idcwh::binio {

inline void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f64(std::ostream& out, double v) {
    write_u64(out, std::bit_cast<std::uint64_t>(v));
}

inline void write_u8(std::ostream& out, std::uint8_t v) {
    out.put(static_cast<char>(v));
}

inline void write_magic(std::ostream& out, const char (&magic)[5]) {
    out.write(magic, 4);
}

// Readers throw DataError with `what` naming the field on short reads so
// truncated files produce a specific message.

inline std::uint32_t read_u32(std::istream& in, const std::string& what) {
    unsigned char b[4];
    if (!in.read(reinterpret_cast<char*>(b), 4))
        throw DataError("truncated file: expected " + what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t read_u64(std::istream& in, const std::string& what) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8))
        throw DataError("truncated file: expected " + what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline double read_f64(std::istream& in, const std::string& what) {
    return std::bit_cast<double>(read_u64(in, what));
}

inline std::uint8_t read_u8(std::istream& in, const std::string& what) {
    char c;
    if (!in.get(c)) throw DataError("truncated file: expected " + what);
    return static_cast<std::uint8_t>(c);
}

inline void read_magic(std::istream& in, const char (&magic)[5], const std::string& format) {
    char got[4];
    if (!in.read(got, 4))
        throw DataError("not a " + format + " file: missing magic");
    if (std::memcmp(got, magic, 4) != 0)
        throw DataError("not a " + format + " file: bad magic \"" +
                        std::string(got, 4) + "\"");
}

}  // namespace idcwh::binio
