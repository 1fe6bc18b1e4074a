#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "idcwh/errors.hpp"

namespace idcwh {

// Relaxation used for the centers-similarity logit theta: COSINE rescales the
// inner product by the vector norms (0.5 * l * cos), INNER keeps the raw
// half inner product.
enum class ThetaMode { Cosine, Inner };

std::string to_string(ThetaMode mode);
ThetaMode theta_mode_from_string(const std::string& s);

// Training hyperparameters. Defaults follow the reference setup:
// sigma^2 = 4, gamma = 1, beta = 0.01, batch 128, SGD momentum 0.9,
// weight decay 5e-4, learning rates 1e-2 / 5e-3 decayed by 0.1 every
// 50 epochs, 150 epochs.
//
// Losses are summed over the batch, not averaged, so learning rates are
// interpreted per batch sum.
struct TrainConfig {
    double sigma_sq = 4.0;       // class-variance scale in the classwise loss
    double gamma = 1.0;          // weight of the centers-similarity loss; 0 = single-loss ablation
    double beta = 0.01;          // weight of the quantization term
    std::uint32_t code_length = 16;
    std::uint32_t batch_size = 128;
    std::uint32_t epochs = 150;
    double lr_encoder = 1e-2;
    double lr_centers = 5e-3;
    double momentum = 0.9;
    double weight_decay = 5e-4;  // applied to encoder weights only
    double lr_decay_factor = 0.1;
    std::uint32_t lr_decay_every = 50;  // epochs
    ThetaMode theta_mode = ThetaMode::Cosine;
    std::int64_t seed = 0;
    // Hidden layer widths of the encoder MLP. The input width comes from the
    // data and the hash layer width is code_length.
    std::vector<std::uint32_t> hidden_sizes = {64};

    bool operator==(const TrainConfig&) const = default;
};

// Returns cfg unchanged if every field is in range; throws ConfigError naming
// the first offending field otherwise. epochs = 0 and zero learning rates are
// legal (no-op training is useful for tests and dry runs).
const TrainConfig& validate_config(const TrainConfig& cfg);

// Flat key=value file, one pair per line; '#' starts a comment. Keys are the
// TrainConfig field names; hidden_sizes takes a comma-separated list.
// Unknown keys are errors.
TrainConfig load_config_file(const std::filesystem::path& path);

// Same parser, but applied on top of an existing config (for presets and
// CLI layering).
void apply_config_file(TrainConfig& cfg, const std::filesystem::path& path);

// Set one field by its config-file key. Shared by the file parser and the
// CLI override path.
void set_config_field(TrainConfig& cfg, const std::string& key, const std::string& value);

// key=value serialization, one line per field, in declaration order.
std::string config_to_string(const TrainConfig& cfg);

}  // namespace idcwh
