#include "idcwh/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "binio.hpp"

namespace idcwh {

namespace {

constexpr char kMagic[5] = "IDCW";
constexpr std::uint32_t kVersion = 1;

// C class means uniform on the sphere of radius `separation`: draw a
// standard normal vector and rescale.
Mat draw_class_means(std::uint32_t classes, std::uint32_t dim, double separation, Rng& rng) {
    Mat means(classes, dim);
    for (std::uint32_t c = 0; c < classes; ++c) {
        double norm_sq = 0.0;
        for (std::uint32_t k = 0; k < dim; ++k) {
            double g = rng.normal();
            means.at(c, k) = g;
            norm_sq += g * g;
        }
        if (norm_sq == 0.0) {
            means.at(c, 0) = separation;  // probability-zero degenerate draw
            continue;
        }
        double scale = separation / std::sqrt(norm_sq);
        for (std::uint32_t k = 0; k < dim; ++k) means.at(c, k) *= scale;
    }
    return means;
}

}  // namespace

Dataset synth_gaussian(std::uint32_t classes, std::uint32_t dim, std::uint32_t per_class,
                       double spread, double separation, Rng& rng) {
    Mat means = draw_class_means(classes, dim, separation, rng);
    std::uint32_t n = classes * per_class;
    Dataset ds;
    ds.features = Mat(n, dim);
    ds.labels = LabelMatrix(classes, n);
    ds.splits.assign(n, Split::Train);
    std::uint32_t i = 0;
    for (std::uint32_t c = 0; c < classes; ++c) {
        for (std::uint32_t s = 0; s < per_class; ++s, ++i) {
            for (std::uint32_t k = 0; k < dim; ++k)
                ds.features.at(i, k) = means.at(c, k) + spread * rng.normal();
            ds.labels.set(c, i);
        }
    }
    ds.validate();
    return ds;
}

Dataset synth_multilabel(std::uint32_t classes, std::uint32_t dim, std::uint32_t samples,
                         std::uint32_t max_labels, double spread, double separation, Rng& rng) {
    if (max_labels == 0 || max_labels > classes)
        throw DataError("max_labels must be in [1, classes]");
    Mat means = draw_class_means(classes, dim, separation, rng);
    Dataset ds;
    ds.features = Mat(samples, dim);
    ds.labels = LabelMatrix(classes, samples);
    ds.splits.assign(samples, Split::Train);
    std::vector<std::uint32_t> idx(classes);
    for (std::uint32_t i = 0; i < samples; ++i) {
        std::uint32_t k = 1 + static_cast<std::uint32_t>(rng.below(max_labels));
        // Partial Fisher-Yates: the first k slots become the chosen labels.
        std::iota(idx.begin(), idx.end(), 0u);
        for (std::uint32_t j = 0; j < k; ++j) {
            std::uint32_t r = j + static_cast<std::uint32_t>(rng.below(classes - j));
            std::swap(idx[j], idx[r]);
        }
        for (std::uint32_t j = 0; j < k; ++j) ds.labels.set(idx[j], i);
        for (std::uint32_t d = 0; d < dim; ++d) {
            double m = 0.0;
            for (std::uint32_t j = 0; j < k; ++j) m += means.at(idx[j], d);
            ds.features.at(i, d) = m / k + spread * rng.normal();
        }
    }
    ds.validate();
    return ds;
}

void save_features(const Dataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    binio::write_magic(out, kMagic);
    binio::write_u32(out, kVersion);
    binio::write_u32(out, ds.sample_count());
    binio::write_u32(out, ds.dim());
    binio::write_u32(out, ds.class_count());
    for (double v : ds.features.data) binio::write_f64(out, v);
    std::uint32_t c = ds.class_count();
    std::uint32_t label_bytes = (c + 7) / 8;
    for (std::uint32_t i = 0; i < ds.sample_count(); ++i) {
        for (std::uint32_t j = 0; j < label_bytes; ++j) {
            std::uint8_t b = 0;
            for (std::uint32_t bit = 0; bit < 8; ++bit) {
                std::uint32_t cls = 8 * j + bit;
                if (cls < c && ds.labels.get(cls, i)) b |= std::uint8_t(1) << bit;
            }
            binio::write_u8(out, b);
        }
    }
    for (Split s : ds.splits) binio::write_u8(out, static_cast<std::uint8_t>(s));
    if (!out) throw DataError("write failed for " + path.string());
}

Dataset load_features(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    binio::read_magic(in, kMagic, "dataset");
    std::uint32_t version = binio::read_u32(in, "version");
    if (version != kVersion)
        throw DataError("malformed header: unsupported dataset version " +
                        std::to_string(version));
    std::uint32_t n = binio::read_u32(in, "sample count");
    std::uint32_t d = binio::read_u32(in, "dim");
    std::uint32_t c = binio::read_u32(in, "class count");
    if (d == 0) throw DataError("dimension mismatch: dim must be positive");
    if (c == 0) throw DataError("dimension mismatch: class count must be positive");
    Dataset ds;
    ds.features = Mat(n, d);
    for (double& v : ds.features.data) v = binio::read_f64(in, "feature value");
    ds.labels = LabelMatrix(c, n);
    std::uint32_t label_bytes = (c + 7) / 8;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < label_bytes; ++j) {
            std::uint8_t b = binio::read_u8(in, "label byte");
            for (std::uint32_t bit = 0; bit < 8; ++bit) {
                std::uint32_t cls = 8 * j + bit;
                if (cls < c && ((b >> bit) & 1)) ds.labels.set(cls, i);
            }
        }
    }
    ds.splits.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::uint8_t tag = binio::read_u8(in, "split tag");
        if (tag > 2)
            throw DataError("invalid split tag " + std::to_string(tag) + " for sample " +
                            std::to_string(i));
        ds.splits[i] = static_cast<Split>(tag);
    }
    ds.validate();
    return ds;
}

namespace {

double parse_csv_double(const std::string& field, std::size_t lineno) {
    double v = 0.0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw DataError("line " + std::to_string(lineno) + ": bad feature value \"" + field +
                        "\"");
    return v;
}

std::uint32_t parse_csv_label(const std::string& field, std::size_t lineno) {
    std::uint32_t v = 0;
    auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw DataError("line " + std::to_string(lineno) + ": bad label id \"" + field + "\"");
    return v;
}

std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        if (pos == std::string::npos) {
            out.push_back(s.substr(start));
            return out;
        }
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

}  // namespace

Dataset load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::vector<std::vector<std::uint32_t>> row_labels;
    std::uint32_t max_label = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto fields = split_on(line, ',');
        if (fields.size() < 2)
            throw DataError("line " + std::to_string(lineno) +
                            ": need at least one feature column and a label column");
        if (!rows.empty() && fields.size() - 1 != rows.front().size())
            throw DataError("dimension mismatch: line " + std::to_string(lineno) + " has " +
                            std::to_string(fields.size() - 1) + " feature columns, expected " +
                            std::to_string(rows.front().size()));
        std::vector<double> feats(fields.size() - 1);
        for (std::size_t k = 0; k + 1 < fields.size(); ++k)
            feats[k] = parse_csv_double(fields[k], lineno);
        std::vector<std::uint32_t> labels;
        for (const auto& id : split_on(fields.back(), ';')) {
            if (id.empty())
                throw DataError("line " + std::to_string(lineno) + ": empty label id");
            std::uint32_t l = parse_csv_label(id, lineno);
            max_label = std::max(max_label, l);
            labels.push_back(l);
        }
        rows.push_back(std::move(feats));
        row_labels.push_back(std::move(labels));
    }
    if (rows.empty()) throw DataError(path.string() + " has no data rows");
    std::uint32_t n = static_cast<std::uint32_t>(rows.size());
    std::uint32_t d = static_cast<std::uint32_t>(rows.front().size());
    Dataset ds;
    ds.features = Mat(n, d);
    ds.labels = LabelMatrix(max_label + 1, n);
    ds.splits.assign(n, Split::Train);
    for (std::uint32_t i = 0; i < n; ++i) {
        std::copy(rows[i].begin(), rows[i].end(), ds.features.row(i).begin());
        for (std::uint32_t l : row_labels[i]) ds.labels.set(l, i);
    }
    ds.validate();
    return ds;
}

Dataset make_splits(const Dataset& ds, std::uint32_t query_per_class,
                    std::uint32_t train_per_class, Rng& rng) {
    ds.validate();
    std::uint32_t c = ds.class_count();
    // Group each sample under its lowest label id so multi-label samples are
    // assigned exactly once.
    std::vector<std::vector<std::uint32_t>> by_class(c);
    for (std::uint32_t i = 0; i < ds.sample_count(); ++i)
        by_class[ds.labels.labels_of(i).front()].push_back(i);
    Dataset out = ds;
    for (std::uint32_t cls = 0; cls < c; ++cls) {
        auto& ids = by_class[cls];
        std::uint32_t need = query_per_class + train_per_class;
        if (ids.size() < need)
            throw DataError("class " + std::to_string(cls) + " has " +
                            std::to_string(ids.size()) + " samples, need " +
                            std::to_string(need) + " (query " + std::to_string(query_per_class) +
                            " + train " + std::to_string(train_per_class) + ")");
        rng.shuffle(ids);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            Split tag = k < query_per_class            ? Split::Query
                        : k < need                     ? Split::Train
                                                       : Split::Database;
            out.splits[ids[k]] = tag;
        }
    }
    return out;
}

}  // namespace idcwh
