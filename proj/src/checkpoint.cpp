#include "idcwh/checkpoint.hpp"

#include <fstream>

#include "binio.hpp"

namespace idcwh {

namespace {
constexpr char kEncoderMagic[5] = "IDCP";
constexpr char kCentersMagic[5] = "IDCC";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void save_checkpoint(const EncoderParams& encoder, const CenterBank& centers,
                     const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    binio::write_magic(out, kEncoderMagic);
    binio::write_u32(out, kVersion);
    binio::write_u32(out, static_cast<std::uint32_t>(encoder.sizes.size()));
    for (std::uint32_t s : encoder.sizes) binio::write_u32(out, s);
    for (std::size_t k = 0; k < encoder.layer_count(); ++k) {
        for (double v : encoder.weights[k].data) binio::write_f64(out, v);
        for (double v : encoder.biases[k]) binio::write_f64(out, v);
    }
    binio::write_magic(out, kCentersMagic);
    binio::write_u32(out, centers.class_count());
    binio::write_u32(out, centers.code_length());
    for (double v : centers.mu.data) binio::write_f64(out, v);
    if (!out) throw DataError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    binio::read_magic(in, kEncoderMagic, "checkpoint");
    std::uint32_t version = binio::read_u32(in, "version");
    if (version != kVersion)
        throw DataError("malformed header: unsupported checkpoint version " +
                        std::to_string(version));
    std::uint32_t n_sizes = binio::read_u32(in, "layer size count");
    if (n_sizes < 2) throw DataError("malformed header: checkpoint needs at least two layers");
    Checkpoint ckpt;
    ckpt.encoder.sizes.resize(n_sizes);
    for (auto& s : ckpt.encoder.sizes) {
        s = binio::read_u32(in, "layer size");
        if (s == 0) throw DataError("malformed header: zero layer width");
    }
    for (std::uint32_t k = 0; k + 1 < n_sizes; ++k) {
        Mat w(ckpt.encoder.sizes[k + 1], ckpt.encoder.sizes[k]);
        for (double& v : w.data) v = binio::read_f64(in, "weight");
        ckpt.encoder.weights.push_back(std::move(w));
        std::vector<double> b(ckpt.encoder.sizes[k + 1]);
        for (double& v : b) v = binio::read_f64(in, "bias");
        ckpt.encoder.biases.push_back(std::move(b));
    }
    binio::read_magic(in, kCentersMagic, "checkpoint centers section");
    std::uint32_t c = binio::read_u32(in, "class count");
    std::uint32_t l = binio::read_u32(in, "code length");
    if (l != ckpt.encoder.code_length())
        throw DataError("dimension mismatch: centers length " + std::to_string(l) +
                        " does not match encoder output " +
                        std::to_string(ckpt.encoder.code_length()));
    ckpt.centers.mu = Mat(c, l);
    for (double& v : ckpt.centers.mu.data) v = binio::read_f64(in, "center value");
    ckpt.centers.velocity = Mat(c, l);
    return ckpt;
}

}  // namespace idcwh
