#pragma once

#include <cstdint>
#include <vector>

#include "idcwh/rng.hpp"
#include "idcwh/types.hpp"

namespace idcwh {

// Learnable real-valued class centers, one row per class, plus the momentum
// buffer used by their SGD updates.
struct CenterBank {
    Mat mu;        // C x l
    Mat velocity;  // C x l

    std::uint32_t class_count() const { return static_cast<std::uint32_t>(mu.rows); }
    std::uint32_t code_length() const { return static_cast<std::uint32_t>(mu.cols); }

    bool operator==(const CenterBank&) const = default;
};

// mu entries i.i.d. normal scaled by 0.01 (small enough that initial
// class-assignment probabilities are near uniform); velocity zero.
CenterBank init_centers(std::uint32_t classes, std::uint32_t code_length, Rng& rng);

// Per-epoch running vote sums: sums[j][v] accumulates the sign bits of every
// class-j sample seen so far this epoch; seen[j] marks classes with at least
// one vote.
struct VoteAccumulator {
    std::uint32_t class_count = 0;
    std::uint32_t code_length = 0;
    std::vector<std::int64_t> sums;  // C x l row-major
    std::vector<std::uint8_t> seen;  // C

    VoteAccumulator() = default;
    VoteAccumulator(std::uint32_t classes, std::uint32_t l)
        : class_count(classes), code_length(l), sums(std::size_t{classes} * l, 0),
          seen(classes, 0) {}

    std::int64_t sum_at(std::uint32_t cls, std::uint32_t v) const {
        return sums[std::size_t{cls} * code_length + v];
    }
};

// Zero the sums and clear the seen flags. Idempotent.
void reset_epoch(VoteAccumulator& acc);

// Every batch sample contributes sign(h_i) to the sum of every class it
// carries (multi-hot columns vote once per carried class).
// batch_labels is C x batch and h is batch x l.
void vote_update(VoteAccumulator& acc, const Mat& h, const LabelMatrix& batch_labels);

// Binary centers of the classes seen so far: u_j = sign(sums[j]) with
// sign(0) = +1. classes lists the seen class ids in ascending order, codes is
// parallel to it.
struct EstimatedCenters {
    std::uint32_t code_length = 0;
    std::vector<std::uint32_t> classes;
    std::vector<BinaryCode> codes;
};

EstimatedCenters estimate(const VoteAccumulator& acc);

// Z x C binary similarity between row classes and every learnable center's
// class. entries are row-major.
struct SimilarityMatrix {
    std::vector<std::uint32_t> row_classes;  // Z
    std::uint32_t class_count = 0;           // C
    std::vector<std::uint8_t> entries;       // Z x C

    bool at(std::size_t row, std::uint32_t cls) const {
        return entries[row * class_count + cls];
    }
};

// With class_tags null every class is similar only to itself (identity rows).
// Otherwise class_tags describes each class as a tag set (tags x C matrix)
// and two classes are similar iff their tag sets intersect; this covers
// composite multi-label classes. Throws DataError when row_classes is empty.
SimilarityMatrix build_similarity(const std::vector<std::uint32_t>& row_classes,
                                  std::uint32_t class_count,
                                  const LabelMatrix* class_tags = nullptr);

}  // namespace idcwh
