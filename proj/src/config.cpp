#include "idcwh/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fmt.hpp"

namespace idcwh {

std::string to_string(ThetaMode mode) {
    return mode == ThetaMode::Cosine ? "COSINE" : "INNER";
}

ThetaMode theta_mode_from_string(const std::string& s) {
    if (s == "COSINE" || s == "cosine") return ThetaMode::Cosine;
    if (s == "INNER" || s == "inner") return ThetaMode::Inner;
    throw ConfigError("theta_mode must be COSINE or INNER, got \"" + s + "\"");
}

namespace {

std::string format_double(double v) { return fmt::shortest(v); }

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError(key + ": expected a number, got \"" + value + "\"");
    return out;
}

std::uint32_t parse_u32(const std::string& key, const std::string& value) {
    std::uint32_t out = 0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError(key + ": expected a nonnegative integer, got \"" + value + "\"");
    return out;
}

std::int64_t parse_i64(const std::string& key, const std::string& value) {
    std::int64_t out = 0;
    auto res = std::from_chars(value.data(), value.data() + value.size(), out);
    if (res.ec != std::errc{} || res.ptr != value.data() + value.size())
        throw ConfigError(key + ": expected an integer, got \"" + value + "\"");
    return out;
}

std::vector<std::uint32_t> parse_u32_list(const std::string& key, const std::string& value) {
    std::vector<std::uint32_t> out;
    if (value.empty()) return out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_u32(key, item));
    return out;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

const TrainConfig& validate_config(const TrainConfig& cfg) {
    if (!(cfg.sigma_sq > 0.0) || !std::isfinite(cfg.sigma_sq))
        throw ConfigError("sigma_sq must be positive");
    if (!(cfg.gamma >= 0.0) || !std::isfinite(cfg.gamma))
        throw ConfigError("gamma must be nonnegative");
    if (!(cfg.beta >= 0.0) || !std::isfinite(cfg.beta))
        throw ConfigError("beta must be nonnegative");
    if (cfg.code_length == 0) throw ConfigError("code_length must be positive");
    if (cfg.batch_size == 0) throw ConfigError("batch_size must be positive");
    if (!(cfg.lr_encoder >= 0.0) || !std::isfinite(cfg.lr_encoder))
        throw ConfigError("lr_encoder must be nonnegative");
    if (!(cfg.lr_centers >= 0.0) || !std::isfinite(cfg.lr_centers))
        throw ConfigError("lr_centers must be nonnegative");
    if (!(cfg.momentum >= 0.0 && cfg.momentum < 1.0))
        throw ConfigError("momentum must be in [0, 1)");
    if (!(cfg.weight_decay >= 0.0) || !std::isfinite(cfg.weight_decay))
        throw ConfigError("weight_decay must be nonnegative");
    if (!(cfg.lr_decay_factor > 0.0 && cfg.lr_decay_factor <= 1.0))
        throw ConfigError("lr_decay_factor must be in (0, 1]");
    if (cfg.lr_decay_every == 0) throw ConfigError("lr_decay_every must be positive");
    for (auto h : cfg.hidden_sizes)
        if (h == 0) throw ConfigError("hidden_sizes entries must be positive");
    return cfg;
}

void set_config_field(TrainConfig& cfg, const std::string& key, const std::string& value) {
    if (key == "sigma_sq")
        cfg.sigma_sq = parse_double(key, value);
    else if (key == "gamma")
        cfg.gamma = parse_double(key, value);
    else if (key == "beta")
        cfg.beta = parse_double(key, value);
    else if (key == "code_length")
        cfg.code_length = parse_u32(key, value);
    else if (key == "batch_size")
        cfg.batch_size = parse_u32(key, value);
    else if (key == "epochs")
        cfg.epochs = parse_u32(key, value);
    else if (key == "lr_encoder")
        cfg.lr_encoder = parse_double(key, value);
    else if (key == "lr_centers")
        cfg.lr_centers = parse_double(key, value);
    else if (key == "momentum")
        cfg.momentum = parse_double(key, value);
    else if (key == "weight_decay")
        cfg.weight_decay = parse_double(key, value);
    else if (key == "lr_decay_factor")
        cfg.lr_decay_factor = parse_double(key, value);
    else if (key == "lr_decay_every")
        cfg.lr_decay_every = parse_u32(key, value);
    else if (key == "theta_mode")
        cfg.theta_mode = theta_mode_from_string(value);
    else if (key == "seed")
        cfg.seed = parse_i64(key, value);
    else if (key == "hidden_sizes")
        cfg.hidden_sizes = parse_u32_list(key, value);
    else
        throw ConfigError("unknown config key \"" + key + "\"");
}

TrainConfig load_config_file(const std::filesystem::path& path) {
    TrainConfig cfg;
    apply_config_file(cfg, path);
    return cfg;
}

void apply_config_file(TrainConfig& cfg, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) +
                              ": expected key=value");
        set_config_field(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
}

std::string config_to_string(const TrainConfig& cfg) {
    std::string hidden;
    for (std::size_t i = 0; i < cfg.hidden_sizes.size(); ++i) {
        if (i) hidden += ',';
        hidden += std::to_string(cfg.hidden_sizes[i]);
    }
    std::string out;
    out += "sigma_sq=" + format_double(cfg.sigma_sq) + "\n";
    out += "gamma=" + format_double(cfg.gamma) + "\n";
    out += "beta=" + format_double(cfg.beta) + "\n";
    out += "code_length=" + std::to_string(cfg.code_length) + "\n";
    out += "batch_size=" + std::to_string(cfg.batch_size) + "\n";
    out += "epochs=" + std::to_string(cfg.epochs) + "\n";
    out += "lr_encoder=" + format_double(cfg.lr_encoder) + "\n";
    out += "lr_centers=" + format_double(cfg.lr_centers) + "\n";
    out += "momentum=" + format_double(cfg.momentum) + "\n";
    out += "weight_decay=" + format_double(cfg.weight_decay) + "\n";
    out += "lr_decay_factor=" + format_double(cfg.lr_decay_factor) + "\n";
    out += "lr_decay_every=" + std::to_string(cfg.lr_decay_every) + "\n";
    out += "theta_mode=" + to_string(cfg.theta_mode) + "\n";
    out += "seed=" + std::to_string(cfg.seed) + "\n";
    out += "hidden_sizes=" + hidden + "\n";
    return out;
}

}  // namespace idcwh
