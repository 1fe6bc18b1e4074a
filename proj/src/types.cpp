#include "idcwh/types.hpp"

#include <string>

namespace idcwh {

std::vector<std::uint32_t> LabelMatrix::labels_of(std::uint32_t sample) const {
    std::vector<std::uint32_t> ids;
    for (std::uint32_t c = 0; c < class_count; ++c)
        if (get(c, sample)) ids.push_back(c);
    return ids;
}

bool LabelMatrix::share_label(std::uint32_t a, std::uint32_t b) const {
    auto ca = column(a);
    auto cb = column(b);
    for (std::size_t w = 0; w < ca.size(); ++w)
        if (ca[w] & cb[w]) return true;
    return false;
}

LabelMatrix LabelMatrix::slice(std::span<const std::uint32_t> samples) const {
    LabelMatrix out(class_count, static_cast<std::uint32_t>(samples.size()));
    std::size_t wps = words_per_sample();
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto col = column(samples[i]);
        std::copy(col.begin(), col.end(), out.bits.begin() + i * wps);
    }
    return out;
}

void LabelMatrix::validate() const {
    for (std::uint32_t i = 0; i < sample_count; ++i) {
        auto col = column(i);
        bool any = false;
        for (auto w : col) any |= (w != 0);
        if (!any) throw DataError("sample " + std::to_string(i) + " has no labels");
    }
}

bool share_label(const LabelMatrix& a, std::uint32_t sa, const LabelMatrix& b, std::uint32_t sb) {
    if (a.class_count != b.class_count) throw DataError("label matrices disagree on class count");
    auto ca = a.column(sa);
    auto cb = b.column(sb);
    for (std::size_t w = 0; w < ca.size(); ++w)
        if (ca[w] & cb[w]) return true;
    return false;
}

std::vector<std::uint32_t> Dataset::split_indices(Split s) const {
    std::vector<std::uint32_t> ids;
    for (std::uint32_t i = 0; i < splits.size(); ++i)
        if (splits[i] == s) ids.push_back(i);
    return ids;
}

Mat Dataset::gather(std::span<const std::uint32_t> ids) const {
    Mat out(ids.size(), features.cols);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        auto src = features.row(ids[i]);
        std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
}

void Dataset::validate() const {
    if (features.rows != labels.sample_count)
        throw DataError("feature row count does not match label column count");
    if (splits.size() != features.rows)
        throw DataError("split tag count does not match sample count");
    labels.validate();
}

}  // namespace idcwh
