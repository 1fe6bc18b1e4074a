#include "idcwh/retrieval.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "binio.hpp"
#include "fmt.hpp"
#include "idcwh/errors.hpp"

namespace idcwh {

RetrievalIndex make_index(std::vector<BinaryCode> codes, LabelMatrix labels) {
    if (labels.sample_count != codes.size())
        throw DataError("index labels are not row-aligned with the codes");
    RetrievalIndex index;
    index.code_length = codes.empty() ? 0 : codes.front().length;
    for (const BinaryCode& c : codes)
        if (c.length != index.code_length)
            throw DataError("index codes have mixed lengths");
    index.codes = std::move(codes);
    index.labels = std::move(labels);
    return index;
}

std::uint32_t hamming(const BinaryCode& a, const BinaryCode& b) {
    if (a.length != b.length)
        throw DataError("hamming distance needs equal code lengths, got " +
                        std::to_string(a.length) + " and " + std::to_string(b.length));
    std::uint32_t d = 0;
    for (std::size_t w = 0; w < a.words.size(); ++w)
        d += static_cast<std::uint32_t>(std::popcount(a.words[w] ^ b.words[w]));
    return d;
}

namespace {

// Distances to every database item, then a counting sort keyed by distance.
// Iterating ids in ascending order keeps equal-distance blocks id-sorted.
// skip_id (if not npos) is left out of the ranking.
std::vector<std::uint32_t> rank_with_dists(const RetrievalIndex& index,
                                           const std::vector<std::uint32_t>& dists,
                                           std::uint32_t skip_id) {
    std::vector<std::uint32_t> counts(index.code_length + 2, 0);
    for (std::uint32_t id = 0; id < index.size(); ++id)
        if (id != skip_id) ++counts[dists[id] + 1];
    for (std::size_t d = 1; d < counts.size(); ++d) counts[d] += counts[d - 1];
    std::vector<std::uint32_t> order(skip_id == UINT32_MAX ? index.size() : index.size() - 1);
    for (std::uint32_t id = 0; id < index.size(); ++id)
        if (id != skip_id) order[counts[dists[id]]++] = id;
    return order;
}

std::vector<std::uint32_t> all_dists(const BinaryCode& query, const RetrievalIndex& index) {
    std::vector<std::uint32_t> dists(index.size());
    for (std::uint32_t id = 0; id < index.size(); ++id)
        dists[id] = hamming(query, index.codes[id]);
    return dists;
}

}  // namespace

std::vector<std::uint32_t> rank(const BinaryCode& query, const RetrievalIndex& index) {
    if (index.size() == 0) throw DataError("cannot rank against an empty index");
    return rank_with_dists(index, all_dists(query, index), UINT32_MAX);
}

std::vector<std::uint8_t> relevance(const LabelMatrix& query_labels, std::uint32_t q,
                                    const RetrievalIndex& index) {
    if (query_labels.class_count != index.labels.class_count)
        throw DataError("query and database label spaces do not match");
    std::vector<std::uint8_t> rel(index.size());
    for (std::uint32_t id = 0; id < index.size(); ++id)
        rel[id] = share_label(query_labels, q, index.labels, id) ? 1 : 0;
    return rel;
}

std::optional<double> average_precision(std::span<const std::uint8_t> ranked_relevance,
                                        std::optional<std::uint32_t> top_k) {
    std::size_t limit = ranked_relevance.size();
    if (top_k) limit = std::min<std::size_t>(limit, *top_k);
    std::uint32_t hits = 0;
    double sum = 0.0;
    for (std::size_t k = 0; k < limit; ++k) {
        if (!ranked_relevance[k]) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(k + 1);
    }
    if (hits == 0) return std::nullopt;
    return sum / hits;
}

namespace {

void check_query_set(const QuerySet& queries, const RetrievalIndex& index, bool exclude_self) {
    if (queries.labels.sample_count != queries.codes.size())
        throw DataError("query labels are not row-aligned with the query codes");
    if (queries.labels.class_count != index.labels.class_count)
        throw DataError("query and database label spaces do not match");
    for (const BinaryCode& c : queries.codes)
        if (c.length != index.code_length)
            throw DataError("code-length mismatch between queries and index");
    if (exclude_self && queries.codes.size() != index.size())
        throw DataError("self-exclusion needs query and database sets of equal size");
    if (index.size() == 0) throw DataError("cannot evaluate against an empty index");
}

}  // namespace

std::pair<double, double> precision_recall_at_radius(const QuerySet& queries,
                                                     const RetrievalIndex& index,
                                                     std::uint32_t radius, bool exclude_self) {
    check_query_set(queries, index, exclude_self);
    double prec_sum = 0.0, rec_sum = 0.0;
    std::uint32_t counted = 0;
    for (std::uint32_t q = 0; q < queries.codes.size(); ++q) {
        std::uint32_t relevant = 0, retrieved = 0, hits = 0;
        for (std::uint32_t id = 0; id < index.size(); ++id) {
            if (exclude_self && id == q) continue;
            bool rel = share_label(queries.labels, q, index.labels, id);
            bool in = hamming(queries.codes[q], index.codes[id]) <= radius;
            relevant += rel;
            retrieved += in;
            hits += (rel && in);
        }
        if (relevant == 0) continue;
        ++counted;
        prec_sum += retrieved ? static_cast<double>(hits) / retrieved : 0.0;
        rec_sum += static_cast<double>(hits) / relevant;
    }
    if (counted == 0) return {0.0, 0.0};
    return {prec_sum / counted, rec_sum / counted};
}

std::vector<std::pair<std::uint32_t, double>> precision_at_n(
    const QuerySet& queries, const RetrievalIndex& index,
    const std::vector<std::uint32_t>& n_list, bool exclude_self) {
    check_query_set(queries, index, exclude_self);
    std::uint32_t effective = index.size() - (exclude_self ? 1 : 0);
    for (std::uint32_t n : n_list)
        if (n == 0 || n > effective)
            throw ConfigError("top-N cutoff " + std::to_string(n) +
                              " is outside the database size " + std::to_string(effective));
    std::vector<double> sums(n_list.size(), 0.0);
    std::uint32_t counted = 0;
    for (std::uint32_t q = 0; q < queries.codes.size(); ++q) {
        auto dists = all_dists(queries.codes[q], index);
        auto order = rank_with_dists(index, dists, exclude_self ? q : UINT32_MAX);
        std::uint32_t relevant = 0;
        std::vector<std::uint32_t> cum(order.size() + 1, 0);
        for (std::size_t k = 0; k < order.size(); ++k) {
            bool rel = share_label(queries.labels, q, index.labels, order[k]);
            relevant += rel;
            cum[k + 1] = cum[k] + rel;
        }
        if (relevant == 0) continue;
        ++counted;
        for (std::size_t i = 0; i < n_list.size(); ++i)
            sums[i] += static_cast<double>(cum[n_list[i]]) / n_list[i];
    }
    std::vector<std::pair<std::uint32_t, double>> out;
    out.reserve(n_list.size());
    for (std::size_t i = 0; i < n_list.size(); ++i)
        out.emplace_back(n_list[i], counted ? sums[i] / counted : 0.0);
    return out;
}

std::vector<std::pair<double, double>> pr_curve(const QuerySet& queries,
                                                const RetrievalIndex& index, bool exclude_self) {
    check_query_set(queries, index, exclude_self);
    std::uint32_t effective = index.size() - (exclude_self ? 1 : 0);
    std::vector<double> prec_sum(effective, 0.0), rec_sum(effective, 0.0);
    std::uint32_t counted = 0;
    for (std::uint32_t q = 0; q < queries.codes.size(); ++q) {
        auto dists = all_dists(queries.codes[q], index);
        auto order = rank_with_dists(index, dists, exclude_self ? q : UINT32_MAX);
        std::uint32_t relevant = 0;
        std::vector<std::uint32_t> cum(order.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            relevant += share_label(queries.labels, q, index.labels, order[k]);
            cum[k] = relevant;
        }
        if (relevant == 0) continue;
        ++counted;
        for (std::uint32_t k = 0; k < effective; ++k) {
            prec_sum[k] += static_cast<double>(cum[k]) / (k + 1);
            rec_sum[k] += static_cast<double>(cum[k]) / relevant;
        }
    }
    std::vector<std::pair<double, double>> curve(effective, {0.0, 0.0});
    if (counted)
        for (std::uint32_t k = 0; k < effective; ++k)
            curve[k] = {rec_sum[k] / counted, prec_sum[k] / counted};
    return curve;
}

double dwdb_ratio(const std::vector<BinaryCode>& codes, const LabelMatrix& labels) {
    if (labels.sample_count != codes.size())
        throw DataError("labels are not row-aligned with the codes");
    std::uint64_t intra_sum = 0, inter_sum = 0, intra_pairs = 0, inter_pairs = 0;
    for (std::uint32_t i = 0; i < codes.size(); ++i) {
        for (std::uint32_t j = i + 1; j < codes.size(); ++j) {
            std::uint32_t d = hamming(codes[i], codes[j]);
            if (share_label(labels, i, labels, j)) {
                intra_sum += d;
                ++intra_pairs;
            } else {
                inter_sum += d;
                ++inter_pairs;
            }
        }
    }
    if (intra_pairs == 0 || inter_pairs == 0)
        throw DataError("distance ratio is degenerate: needs both within-class and "
                        "between-class pairs");
    double dw = static_cast<double>(intra_sum) / intra_pairs;
    double db = static_cast<double>(inter_sum) / inter_pairs;
    if (db == 0.0)
        throw DataError("distance ratio is degenerate: zero between-class distance");
    return dw / db;
}

MetricsReport evaluate(const QuerySet& queries, const RetrievalIndex& index,
                       const std::vector<std::uint32_t>& n_grid,
                       std::optional<std::uint32_t> map_k, bool exclude_self) {
    check_query_set(queries, index, exclude_self);
    std::uint32_t effective = index.size() - (exclude_self ? 1 : 0);
    if (effective == 0) throw DataError("self-exclusion leaves an empty database");
    for (std::uint32_t n : n_grid)
        if (n == 0 || n > effective)
            throw ConfigError("top-N cutoff " + std::to_string(n) +
                              " is outside the database size " + std::to_string(effective));

    MetricsReport report;
    report.query_count = static_cast<std::uint32_t>(queries.codes.size());
    report.database_count = index.size();
    report.code_length = index.code_length;
    report.map_k = map_k;
    report.exclude_self = exclude_self;

    double map_sum = 0.0, prec2_sum = 0.0, rec2_sum = 0.0;
    std::vector<double> pn_sums(n_grid.size(), 0.0);
    std::vector<double> prec_sum(effective, 0.0), rec_sum(effective, 0.0);
    std::uint32_t counted = 0;

    std::vector<std::uint8_t> rel(effective);
    std::vector<std::uint32_t> cum(effective);
    for (std::uint32_t q = 0; q < queries.codes.size(); ++q) {
        auto dists = all_dists(queries.codes[q], index);
        auto order = rank_with_dists(index, dists, exclude_self ? q : UINT32_MAX);
        std::uint32_t relevant = 0;
        for (std::size_t k = 0; k < order.size(); ++k) {
            rel[k] = share_label(queries.labels, q, index.labels, order[k]) ? 1 : 0;
            relevant += rel[k];
            cum[k] = relevant;
        }
        if (relevant == 0) continue;
        ++counted;

        map_sum += average_precision(std::span<const std::uint8_t>(rel.data(), effective),
                                     map_k)
                       .value_or(0.0);

        std::uint32_t retrieved = 0;
        while (retrieved < effective && dists[order[retrieved]] <= 2) ++retrieved;
        std::uint32_t hits = retrieved ? cum[retrieved - 1] : 0;
        prec2_sum += retrieved ? static_cast<double>(hits) / retrieved : 0.0;
        rec2_sum += static_cast<double>(hits) / relevant;

        for (std::size_t i = 0; i < n_grid.size(); ++i)
            pn_sums[i] += static_cast<double>(cum[n_grid[i] - 1]) / n_grid[i];
        for (std::uint32_t k = 0; k < effective; ++k) {
            prec_sum[k] += static_cast<double>(cum[k]) / (k + 1);
            rec_sum[k] += static_cast<double>(cum[k]) / relevant;
        }
    }

    if (counted) {
        report.map = map_sum / counted;
        report.p_at_h2 = prec2_sum / counted;
        report.r_at_h2 = rec2_sum / counted;
        for (std::size_t i = 0; i < n_grid.size(); ++i)
            report.p_at_n.emplace_back(n_grid[i], pn_sums[i] / counted);
        report.pr.reserve(effective);
        for (std::uint32_t k = 0; k < effective; ++k)
            report.pr.emplace_back(rec_sum[k] / counted, prec_sum[k] / counted);
    } else {
        for (std::uint32_t n : n_grid) report.p_at_n.emplace_back(n, 0.0);
        report.pr.assign(effective, {0.0, 0.0});
    }

    try {
        report.dwdb = dwdb_ratio(index.codes, index.labels);
    } catch (const DataError&) {
        report.dwdb = std::nullopt;
    }
    return report;
}

void export_json(const MetricsReport& report, const std::filesystem::path& path) {
    nlohmann::ordered_json j;
    j["conventions"] = {
        {"tie_break", "ascending database id"},
        {"zero_relevant_queries", "excluded from macro averages"},
        {"empty_radius_retrieval", "precision 0"},
        {"sign_of_zero", "+1"},
    };
    j["code_length"] = report.code_length;
    j["query_count"] = report.query_count;
    j["database_count"] = report.database_count;
    j["exclude_self"] = report.exclude_self;
    j["map"] = report.map;
    if (report.map_k)
        j["map_k"] = *report.map_k;
    else
        j["map_k"] = nullptr;
    j["p_at_h2"] = report.p_at_h2;
    j["r_at_h2"] = report.r_at_h2;
    if (report.dwdb)
        j["dwdb"] = *report.dwdb;
    else
        j["dwdb"] = nullptr;
    j["p_at_n"] = nlohmann::ordered_json::array();
    for (auto [n, p] : report.p_at_n) j["p_at_n"].push_back({{"n", n}, {"precision", p}});
    j["pr_curve"] = nlohmann::ordered_json::array();
    for (auto [r, p] : report.pr) j["pr_curve"].push_back({{"recall", r}, {"precision", p}});
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

void export_csv(const MetricsReport& report, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "# tie_break=ascending database id\n"
           "# zero_relevant_queries=excluded from macro averages\n"
           "# empty_radius_retrieval=precision 0\n"
           "metric,x,y\n";
    out << "map,," << fmt::shortest(report.map) << '\n';
    if (report.map_k) out << "map_k," << *report.map_k << ",\n";
    out << "p_at_h2,," << fmt::shortest(report.p_at_h2) << '\n';
    out << "r_at_h2,," << fmt::shortest(report.r_at_h2) << '\n';
    if (report.dwdb) out << "dwdb,," << fmt::shortest(*report.dwdb) << '\n';
    for (auto [n, p] : report.p_at_n)
        out << "p_at_n," << n << ',' << fmt::shortest(p) << '\n';
    for (auto [r, p] : report.pr)
        out << "pr," << fmt::shortest(r) << ',' << fmt::shortest(p) << '\n';
    if (!out) throw DataError("write failed for " + path.string());
}

void save_codes(const std::vector<BinaryCode>& codes, const LabelMatrix& labels,
                const std::filesystem::path& path, std::optional<std::uint32_t> code_length) {
    if (labels.sample_count != codes.size())
        throw DataError("labels are not row-aligned with the codes");
    std::uint32_t l = code_length.value_or(codes.empty() ? 0 : codes.front().length);
    for (const BinaryCode& c : codes)
        if (c.length != l) throw DataError("codes have mixed lengths");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    binio::write_magic(out, "IDCB");
    binio::write_u32(out, static_cast<std::uint32_t>(codes.size()));
    binio::write_u32(out, l);
    for (const BinaryCode& c : codes)
        for (std::uint64_t w : c.words) binio::write_u64(out, w);
    std::uint32_t c_count = labels.class_count;
    binio::write_u32(out, c_count);
    std::uint32_t label_bytes = (c_count + 7) / 8;
    for (std::uint32_t i = 0; i < labels.sample_count; ++i) {
        for (std::uint32_t j = 0; j < label_bytes; ++j) {
            std::uint8_t b = 0;
            for (std::uint32_t bit = 0; bit < 8; ++bit) {
                std::uint32_t cls = 8 * j + bit;
                if (cls < c_count && labels.get(cls, i)) b |= std::uint8_t(1) << bit;
            }
            binio::write_u8(out, b);
        }
    }
    if (!out) throw DataError("write failed for " + path.string());
}

std::pair<std::vector<BinaryCode>, LabelMatrix> load_codes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    binio::read_magic(in, "IDCB", "codes");
    std::uint32_t n = binio::read_u32(in, "code count");
    std::uint32_t l = binio::read_u32(in, "code length");
    std::vector<BinaryCode> codes;
    codes.reserve(n);
    std::uint32_t words = (l + 63) / 64;
    for (std::uint32_t i = 0; i < n; ++i) {
        BinaryCode c(l);
        for (std::uint32_t w = 0; w < words; ++w) c.words[w] = binio::read_u64(in, "code word");
        if (l % 64 != 0 && words > 0 && (c.words[words - 1] >> (l % 64)) != 0)
            throw DataError("corrupt codes file: stray bits beyond the code length");
        codes.push_back(std::move(c));
    }
    std::uint32_t c_count = binio::read_u32(in, "class count");
    LabelMatrix labels(c_count, n);
    std::uint32_t label_bytes = (c_count + 7) / 8;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = 0; j < label_bytes; ++j) {
            std::uint8_t b = binio::read_u8(in, "label byte");
            for (std::uint32_t bit = 0; bit < 8; ++bit) {
                std::uint32_t cls = 8 * j + bit;
                if (cls < c_count && ((b >> bit) & 1)) labels.set(cls, i);
            }
        }
    }
    return {std::move(codes), std::move(labels)};
}

}  // namespace idcwh
