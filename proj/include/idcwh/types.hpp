#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "idcwh/errors.hpp"

namespace idcwh {

// Dense row-major double matrix; the workhorse container for features,
// hash outputs, parameters, and gradients.
struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Mat() = default;
    Mat(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
    std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

    void fill(double v) { std::fill(data.begin(), data.end(), v); }
    bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

    bool operator==(const Mat&) const = default;
};

// Sign with the tie convention used throughout: zero maps to +1.
inline int sign_bit(double v) { return v >= 0.0 ? 1 : -1; }

// Packed binary code over {-1,+1}; bit set <=> +1. Bit v lives in word v/64
// at position v%64. Bits past `length` stay zero so XOR/popcount distances
// never see them.
struct BinaryCode {
    std::uint32_t length = 0;
    std::vector<std::uint64_t> words;

    BinaryCode() = default;
    explicit BinaryCode(std::uint32_t l) : length(l), words((l + 63) / 64, 0) {}

    static BinaryCode from_signs(std::span<const double> values) {
        BinaryCode c(static_cast<std::uint32_t>(values.size()));
        for (std::uint32_t v = 0; v < c.length; ++v)
            if (values[v] >= 0.0) c.words[v >> 6] |= std::uint64_t{1} << (v & 63);
        return c;
    }

    // Entries must be +1 or -1.
    static BinaryCode from_bits(std::span<const int> pm1) {
        BinaryCode c(static_cast<std::uint32_t>(pm1.size()));
        for (std::uint32_t v = 0; v < c.length; ++v)
            if (pm1[v] > 0) c.words[v >> 6] |= std::uint64_t{1} << (v & 63);
        return c;
    }

    bool bit(std::uint32_t v) const { return (words[v >> 6] >> (v & 63)) & 1; }

    void set_bit(std::uint32_t v, bool plus) {
        std::uint64_t mask = std::uint64_t{1} << (v & 63);
        if (plus)
            words[v >> 6] |= mask;
        else
            words[v >> 6] &= ~mask;
    }

    // +/-1 integer view.
    std::vector<int> to_signs() const {
        std::vector<int> s(length);
        for (std::uint32_t v = 0; v < length; ++v) s[v] = bit(v) ? 1 : -1;
        return s;
    }

    bool operator==(const BinaryCode&) const = default;
};

// C x N binary label matrix; multi-hot columns allowed. Stored column-packed:
// each sample's C bits occupy ceil(C/64) words, so label-set intersection is
// a handful of ANDs.
struct LabelMatrix {
    std::uint32_t class_count = 0;
    std::uint32_t sample_count = 0;
    std::vector<std::uint64_t> bits;

    LabelMatrix() = default;
    LabelMatrix(std::uint32_t classes, std::uint32_t samples)
        : class_count(classes),
          sample_count(samples),
          bits(words_per_sample() * samples, 0) {}

    std::size_t words_per_sample() const { return (class_count + 63) / 64; }

    bool get(std::uint32_t cls, std::uint32_t sample) const {
        return (bits[sample * words_per_sample() + (cls >> 6)] >> (cls & 63)) & 1;
    }
    void set(std::uint32_t cls, std::uint32_t sample) {
        bits[sample * words_per_sample() + (cls >> 6)] |= std::uint64_t{1} << (cls & 63);
    }

    std::span<const std::uint64_t> column(std::uint32_t sample) const {
        return {bits.data() + sample * words_per_sample(), words_per_sample()};
    }

    std::vector<std::uint32_t> labels_of(std::uint32_t sample) const;

    // Do the label sets of samples a and b intersect?
    bool share_label(std::uint32_t a, std::uint32_t b) const;

    // Sub-matrix with the given sample columns, in the given order.
    LabelMatrix slice(std::span<const std::uint32_t> samples) const;

    // Throws DataError unless every sample carries at least one label.
    void validate() const;

    bool operator==(const LabelMatrix&) const = default;
};

// Label-set intersection across two matrices over the same class space.
bool share_label(const LabelMatrix& a, std::uint32_t sa, const LabelMatrix& b, std::uint32_t sb);

enum class Split : std::uint8_t { Train = 0, Query = 1, Database = 2 };

struct Dataset {
    Mat features;               // N x d
    LabelMatrix labels;         // C x N
    std::vector<Split> splits;  // N

    std::uint32_t sample_count() const { return static_cast<std::uint32_t>(features.rows); }
    std::uint32_t dim() const { return static_cast<std::uint32_t>(features.cols); }
    std::uint32_t class_count() const { return labels.class_count; }

    std::vector<std::uint32_t> split_indices(Split s) const;

    // Feature rows for the given samples, in order.
    Mat gather(std::span<const std::uint32_t> ids) const;

    // Structural invariants: row/column agreement, every sample labeled.
    void validate() const;
};

}  // namespace idcwh
