#pragma once

#include <filesystem>

#include "idcwh/centers.hpp"
#include "idcwh/encoder.hpp"

namespace idcwh {

struct Checkpoint {
    EncoderParams encoder;
    CenterBank centers;  // velocity restored as zero
};

// Checkpoint file: "IDCP" magic, u32 version, u32 layer-size count, the
// sizes, then per layer the weight matrix (out x in, row-major f64) and bias
// vector; followed by an embedded centers section: "IDCC" magic, u32 C,
// u32 l, C x l f64. Little-endian, momentum buffers are not persisted.
void save_checkpoint(const EncoderParams& encoder, const CenterBank& centers,
                     const std::filesystem::path& path);

Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace idcwh
