#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "idcwh/config.hpp"
#include "idcwh/types.hpp"

namespace idcwh {

// Bundled desk-scale experiment setups. The dataset is generated on demand
// from a fixed data seed, so every run sees identical samples; only the
// training seed varies between runs.
struct Preset {
    std::string name;

    enum class Kind { Gaussian, Multilabel } kind = Kind::Gaussian;
    std::uint32_t classes = 0;
    std::uint32_t dim = 0;
    std::uint32_t per_class = 0;   // Gaussian: samples per class
    std::uint32_t samples = 0;     // Multilabel: total samples
    std::uint32_t max_labels = 1;  // Multilabel only
    double spread = 0.0;
    double separation = 0.0;
    std::uint64_t data_seed = 0;

    // Split protocol. query_per_class = 0 leaves everything in the train
    // split (self-retrieval presets query the train set against itself).
    std::uint32_t query_per_class = 0;
    std::uint32_t train_per_class = 0;
    bool train_in_db = false;   // database pool = Database tags plus Train tags
    bool exclude_self = false;  // self-retrieval: drop the query's own row

    TrainConfig cfg;
    std::vector<std::uint32_t> p_at_n_grid;
};

std::vector<std::string> preset_names();

// Throws ConfigError for unknown names.
const Preset& get_preset(const std::string& name);

// Generate the preset's dataset (fixed data seed) and apply its splits.
Dataset build_preset_dataset(const Preset& preset);

}  // namespace idcwh
