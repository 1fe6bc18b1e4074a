#include "idcwh/centers.hpp"

#include <algorithm>

#include "idcwh/errors.hpp"

namespace idcwh {

CenterBank init_centers(std::uint32_t classes, std::uint32_t code_length, Rng& rng) {
    if (classes == 0 || code_length == 0)
        throw ConfigError("center bank needs positive class count and code length");
    CenterBank bank;
    bank.mu = Mat(classes, code_length);
    bank.velocity = Mat(classes, code_length);
    for (double& v : bank.mu.data) v = 0.01 * rng.normal();
    return bank;
}

void reset_epoch(VoteAccumulator& acc) {
    std::fill(acc.sums.begin(), acc.sums.end(), std::int64_t{0});
    std::fill(acc.seen.begin(), acc.seen.end(), std::uint8_t{0});
}

void vote_update(VoteAccumulator& acc, const Mat& h, const LabelMatrix& batch_labels) {
    if (batch_labels.class_count != acc.class_count ||
        batch_labels.sample_count != h.rows || h.cols != acc.code_length)
        throw DataError("vote_update shapes do not agree");
    for (std::uint32_t i = 0; i < batch_labels.sample_count; ++i) {
        for (std::uint32_t cls : batch_labels.labels_of(i)) {
            acc.seen[cls] = 1;
            std::int64_t* row = acc.sums.data() + std::size_t{cls} * acc.code_length;
            for (std::uint32_t v = 0; v < acc.code_length; ++v)
                row[v] += sign_bit(h.at(i, v));
        }
    }
}

EstimatedCenters estimate(const VoteAccumulator& acc) {
    EstimatedCenters est;
    est.code_length = acc.code_length;
    for (std::uint32_t cls = 0; cls < acc.class_count; ++cls) {
        if (!acc.seen[cls]) continue;
        BinaryCode code(acc.code_length);
        for (std::uint32_t v = 0; v < acc.code_length; ++v)
            code.set_bit(v, acc.sum_at(cls, v) >= 0);
        est.classes.push_back(cls);
        est.codes.push_back(std::move(code));
    }
    return est;
}

SimilarityMatrix build_similarity(const std::vector<std::uint32_t>& row_classes,
                                  std::uint32_t class_count, const LabelMatrix* class_tags) {
    if (row_classes.empty()) throw DataError("similarity matrix needs at least one row class");
    SimilarityMatrix s;
    s.row_classes = row_classes;
    s.class_count = class_count;
    s.entries.assign(row_classes.size() * std::size_t{class_count}, 0);
    for (std::size_t r = 0; r < row_classes.size(); ++r) {
        for (std::uint32_t cls = 0; cls < class_count; ++cls) {
            bool sim = class_tags ? share_label(*class_tags, row_classes[r], *class_tags, cls)
                                  : row_classes[r] == cls;
            s.entries[r * class_count + cls] = sim ? 1 : 0;
        }
    }
    return s;
}

}  // namespace idcwh
