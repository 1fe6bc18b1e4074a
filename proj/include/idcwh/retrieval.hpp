#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "idcwh/types.hpp"

namespace idcwh {

// Immutable database of packed codes with row-aligned labels; queries are
// answered by brute-force popcount scan.
struct RetrievalIndex {
    std::uint32_t code_length = 0;
    std::vector<BinaryCode> codes;
    LabelMatrix labels;  // C x N_db

    std::uint32_t size() const { return static_cast<std::uint32_t>(codes.size()); }
};

// Validates code lengths and label alignment.
RetrievalIndex make_index(std::vector<BinaryCode> codes, LabelMatrix labels);

// popcount(a xor b); throws DataError on length mismatch.
std::uint32_t hamming(const BinaryCode& a, const BinaryCode& b);

// Database ids by ascending distance, ties by ascending id. Counting sort
// over distances, O(N + l).
std::vector<std::uint32_t> rank(const BinaryCode& query, const RetrievalIndex& index);

// Per-database-item relevance of query sample q: 1 iff the label sets
// intersect.
std::vector<std::uint8_t> relevance(const LabelMatrix& query_labels, std::uint32_t q,
                                    const RetrievalIndex& index);

// AP over a ranked relevance vector, optionally truncated to top_k:
// (1/R) * sum over relevant ranks k of precision@k. Returns nullopt when the
// evaluated range has no relevant item (such queries are skipped by the
// aggregate metrics).
std::optional<double> average_precision(std::span<const std::uint8_t> ranked_relevance,
                                        std::optional<std::uint32_t> top_k = std::nullopt);

// Query set against an index. Queries whose relevant set is empty are
// excluded from every macro average; a query retrieving nothing within the
// radius scores precision 0 there. exclude_self drops database item i from
// query i's view (self-retrieval protocol; requires equal set sizes).
struct QuerySet {
    std::vector<BinaryCode> codes;
    LabelMatrix labels;  // C x N_q
};

std::pair<double, double> precision_recall_at_radius(const QuerySet& queries,
                                                     const RetrievalIndex& index,
                                                     std::uint32_t radius = 2,
                                                     bool exclude_self = false);

// Macro-averaged precision among the top n for each n in n_list; n must not
// exceed the (per-query) database size.
std::vector<std::pair<std::uint32_t, double>> precision_at_n(
    const QuerySet& queries, const RetrievalIndex& index,
    const std::vector<std::uint32_t>& n_list, bool exclude_self = false);

// Macro-averaged (recall@k, precision@k) for every cutoff k = 1..N_db.
std::vector<std::pair<double, double>> pr_curve(const QuerySet& queries,
                                                const RetrievalIndex& index,
                                                bool exclude_self = false);

// Mean pairwise intra-class Hamming distance over mean pairwise inter-class
// distance; pairs are intra when their label sets intersect. Throws DataError
// unless both pair kinds exist.
double dwdb_ratio(const std::vector<BinaryCode>& codes, const LabelMatrix& labels);

struct MetricsReport {
    double map = 0.0;
    double p_at_h2 = 0.0;
    double r_at_h2 = 0.0;
    std::vector<std::pair<std::uint32_t, double>> p_at_n;
    std::vector<std::pair<double, double>> pr;  // (recall, precision) per cutoff
    std::optional<double> dwdb;                 // nullopt when the database is degenerate
    std::uint32_t query_count = 0;
    std::uint32_t database_count = 0;
    std::uint32_t code_length = 0;
    std::optional<std::uint32_t> map_k;         // set when MAP was truncated
    bool exclude_self = false;
};

// All metrics in one pass over the query set. map_k truncates MAP only;
// the curves always span the full ranking. dwdb is computed on the database
// side and left empty when no intra or no inter pairs exist.
MetricsReport evaluate(const QuerySet& queries, const RetrievalIndex& index,
                       const std::vector<std::uint32_t>& n_grid,
                       std::optional<std::uint32_t> map_k = std::nullopt,
                       bool exclude_self = false);

// JSON and CSV report writers. The JSON carries a "conventions" object
// (tie-breaking, zero-relevant handling, empty-radius handling); the CSV has
// a commented header and one metric,x,y row per scalar or curve point.
void export_json(const MetricsReport& report, const std::filesystem::path& path);
void export_csv(const MetricsReport& report, const std::filesystem::path& path);

// Codes file: "IDCB" magic, u32 N, u32 l, per code ceil(l/64) little-endian
// u64 words, then u32 C and per-sample packed label bytes. code_length pins
// the header value when the code list is empty (and is checked otherwise).
void save_codes(const std::vector<BinaryCode>& codes, const LabelMatrix& labels,
                const std::filesystem::path& path,
                std::optional<std::uint32_t> code_length = std::nullopt);
std::pair<std::vector<BinaryCode>, LabelMatrix> load_codes(const std::filesystem::path& path);

}  // namespace idcwh
