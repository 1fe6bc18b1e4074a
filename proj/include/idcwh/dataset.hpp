#pragma once

#include <cstdint>
#include <filesystem>

#include "idcwh/rng.hpp"
#include "idcwh/types.hpp"

namespace idcwh {

// Gaussian blob data: class means drawn uniformly on the sphere of radius
// `separation`, samples isotropic with std `spread` around their mean,
// one-hot labels, all samples tagged Train. Samples are emitted class-major.
// The noise draw does not depend on `spread` (it is drawn, then scaled), so
// two runs with the same seed and different spreads share class means.
Dataset synth_gaussian(std::uint32_t classes, std::uint32_t dim, std::uint32_t per_class,
                       double spread, double separation, Rng& rng);

// Multi-label variant: each sample draws k ~ Uniform{1..max_labels} distinct
// labels; its feature is the mean of the chosen class means plus noise.
Dataset synth_multilabel(std::uint32_t classes, std::uint32_t dim, std::uint32_t samples,
                         std::uint32_t max_labels, double spread, double separation, Rng& rng);

// Binary dataset file: "IDCW" magic, u32 version, u32 N, u32 d, u32 C,
// N*d f64 features row-major, per-sample ceil(C/8) label bytes (LSB first),
// N split tag bytes. Little-endian throughout.
void save_features(const Dataset& ds, const std::filesystem::path& path);
Dataset load_features(const std::filesystem::path& path);

// CSV import: one sample per line, d feature columns then a final column of
// label ids joined by ';'. Class count is max label id + 1. All samples are
// tagged Train; use make_splits afterwards.
Dataset load_csv(const std::filesystem::path& path);

// Per-class disjoint splits: for every class, query_per_class samples become
// Query, train_per_class become Train, the rest Database. Multi-label samples
// are grouped under their lowest label id so each sample is drawn once.
// Throws DataError when a class has fewer samples than query+train.
Dataset make_splits(const Dataset& ds, std::uint32_t query_per_class,
                    std::uint32_t train_per_class, Rng& rng);

}  // namespace idcwh
